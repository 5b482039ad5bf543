#!/usr/bin/env python3
"""Independent re-derivation of the closed-form bound spot values.

Evaluates the balanced-cut broadcast lower bound and the multicast lower
bound directly from their formulas at the pinned tuple
(n=10^4, r=0.05, eps=0.1, alpha=0.5, gamma=0.5). The acceptance suite
freezes these outputs as its expected constants.
"""
import math

n, r, e, a, g = 1e4, 0.05, 0.1, 0.5, 0.5

print("capcut   =", 1.5 * min(math.sqrt(a - 2 * e), math.sqrt(1 - a - 2 * e)) * (1 - 2 * e) / math.sqrt(1 + e) * n * r * (1 - g ** ((1 - 2 * e) * 0.25 * n * r * r)))
print("multicast =", 3 / 8 * math.sqrt(a - 2 * e) * (1 - 2 * e) ** 2 / math.sqrt(1 + e) * n * n * r ** 3 * (1 - g))
