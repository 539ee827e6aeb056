"""
Ordered fuzzy numbers
=====================

Arithmetic, the area-based uncertainty measure and the probabilistic
comparison that the controller uses to rank streams.
"""

from vsnsim.fuzzy import FuzzyNumber, crisp, fuzzy_argmax, normalize, prob_less, uncertainty

# a trapezoid is four ordered breakpoints; arithmetic works on each one
a = FuzzyNumber(1, 2, 3, 4)
b = FuzzyNumber(1, 1, 2, 2)
print("a + b       =", tuple(a + b))

# subtraction can produce an improper number, normalize sorts it back
d = FuzzyNumber(0, 1, 2, 3) - FuzzyNumber(0, 2, 2, 6)
print("improper    =", tuple(d), "->", tuple(normalize(d)))

# uncertainty is the area under the membership function
for q in [(3, 3, 3, 3), (0, 2, 2, 4), (2, 3, 5, 6)]:
    print(f"unc{q} = {uncertainty(FuzzyNumber(*q))}")

# P(A < B) treats each number as a density; a crisp value is a point mass
tri = FuzzyNumber(0, 2, 2, 4)
print("P(tri < 1)  =", prob_less(tri, crisp(1)))
print("P(tri < tri)=", round(prob_less(tri, tri), 12))

# the fuzzy argmax returns the winner and how sure it is
print("argmax      =", fuzzy_argmax([tri, FuzzyNumber(1, 2, 2, 3), crisp(1.5)]))
