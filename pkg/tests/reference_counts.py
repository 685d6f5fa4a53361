"""Expected mesh topology and unknown counts for the four families.

Keyed by refinement index n = 0..8; each row is (cells, edges, vertices,
dofs order 2, dofs order 3, dofs order 4, dofs order 5). Order-5 counts are
only available through n = 4 (None beyond).
"""

CRISSCROSS = {
    0: (100, 160, 61, 221, 541, 961, 1481),
    1: (400, 620, 221, 841, 2081, 3721, 5761),
    2: (1600, 2440, 841, 3281, 8161, 14641, 22721),
    3: (3600, 5460, 1861, 7321, 18241, 32761, 50881),
    4: (6400, 9680, 3281, 12961, 32321, 58081, 90241),
    5: (10000, 15100, 5101, 20201, 50401, 90601, None),
    6: (14400, 21720, 7321, 29041, 72481, 130321, None),
    7: (19600, 29540, 9941, 39481, 98561, 177241, None),
    8: (25600, 38560, 12961, 51521, 128641, 231361, None),
}

HEXAGONAL = {
    0: (36, 125, 90, 215, 465, 751, 1073),
    1: (121, 400, 280, 680, 1480, 2401, 3443),
    2: (441, 1400, 960, 2360, 5160, 8401, 12083),
    3: (961, 3000, 2040, 5040, 11040, 18001, 25923),
    4: (1681, 5200, 3520, 8720, 19120, 31201, 44963),
    5: (2601, 8000, 5400, 13400, 29400, 48001, None),
    6: (3721, 11400, 7680, 19080, 41880, 68401, None),
    7: (5041, 15400, 10360, 25760, 56560, 92401, None),
    8: (6561, 20000, 13440, 33440, 73440, 120001, None),
}

OCTAGONAL = {
    0: (25, 120, 96, 216, 456, 721, 1011),
    1: (100, 440, 341, 781, 1661, 2641, 3721),
    2: (400, 1680, 1281, 2961, 6321, 10081, 14241),
    3: (900, 3720, 2821, 6541, 13981, 22321, 31561),
    4: (1600, 6560, 4961, 11521, 24641, 39361, 55681),
    5: (2500, 10200, 7701, 17901, 38301, 61201, None),
    6: (3600, 14640, 11041, 25681, 54961, 87841, None),
    7: (4900, 19880, 14981, 34861, 74621, 119281, None),
    8: (6400, 25920, 19521, 45441, 97281, 155521, None),
}

RANDOMQUAD = {
    0: (25, 60, 36, 96, 216, 361, 531),
    1: (100, 220, 121, 341, 781, 1321, 1961),
    2: (400, 840, 441, 1281, 2961, 5041, 7521),
    3: (900, 1860, 961, 2821, 6541, 11161, 16681),
    4: (1600, 3280, 1681, 4961, 11521, 19681, 29441),
    5: (2500, 5100, 2601, 7701, 17901, 30601, None),
    6: (3600, 7320, 3721, 11041, 25681, 43921, None),
    7: (4900, 9940, 5041, 14981, 34861, 59641, None),
    8: (6400, 12960, 6561, 19521, 45441, 77761, None),
}

BY_FAMILY = {
    "crisscross": CRISSCROSS,
    "hexagonal": HEXAGONAL,
    "octagonal": OCTAGONAL,
    "randomquad": RANDOMQUAD,
}
