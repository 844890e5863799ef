"""
The algebraic norm and its decompositions
=========================================

nu = 1 + sigma + ... + sigma^(p^N - 1), written as a polynomial in
x = sigma - 1, has binomial coefficients C(p^N, i). Splitting it as
x^k * A + p^f(k) * B shows when nu kills a module: if (sigma - 1)^k and
p^f(k) both vanish on it, so does nu.
"""

from capnorm.normpoly import build_nu, is_smooth, program_output, reduce_mod_ideal
from capnorm.padic import f_step

# the polynomial for p=2, N=2, printed with p kept symbolic
for line in program_output(2, 2):
    print(line)

# f(k) drops by one each time k crosses a power of p
p, N = 3, 2
print("\nf(k) for p=3, N=2:", [f_step(k, N, p) for k in range(1, p**N)])

# every smooth pair (m, e) makes nu vanish mod (x^m, p^e)
nu = build_nu(p, N)
print("\n  m  e  smooth  nu mod (x^m, p^e)")
for m in (1, 2, 3, 4, 8):
    for e in (1, 2, 3):
        res = reduce_mod_ideal(nu, m, e)
        print(f"{m:3d}{e:3d}  {str(is_smooth(m, e, N, p)):6s}  {res}")
