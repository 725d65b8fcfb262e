"""The 2x2 matrix Gamma(z; lam) rebuilt from the resolvent of K."""
# %%
import numpy as np

from multihilbert import discretize as dz
from multihilbert import rhp
from multihilbert import spectral as sp
from multihilbert.geometry import validate_configuration

cfg = validate_configuration([[0, 1]], [[2, 3]])
grid = dz.build_grid(cfg, panels=16)
K = dz.assemble_K(cfg, grid)

# %%
# Solve (Id - K/lam) F = f once, then Gamma is a Cauchy integral of F g^T.
lam = 2j
field = rhp.GammaField(rhp.solve_F(cfg, grid, K, lam))
for z in (0.5 + 0.5j, 2.5 - 0.2j, 10.0 + 0j, 1e4 + 0j):
    G = field(z)
    print(f"z = {z}: det = {np.linalg.det(G):.12f}, |Gamma - I| = {np.abs(G - np.eye(2)).max():.2e}")

# %%
# Across U the boundary values satisfy Gamma_+ = Gamma_- (I - (2i/lam) f g^T).
out = rhp.check_jump(field, [0.25, 0.75, 2.25, 2.75])
for p, lab, r in zip(out["probe"], out["label"], out["exact"]):
    print(f"x = {p} ({lab}): jump residual {r:.1e}")

# %%
# Resolvent kernel from Gamma against the inverse of the Nystrom matrix.
print(rhp.resolvent_checks(field))

# %%
# Near an eigenvalue lam_1 of K, Gamma has a simple pole with a rank-one residue.
lam_k, _ = sp.eigenvalues_K(K)
probe = rhp.residue_rank_probe(cfg, grid, K, lam_k[-1], [0.5 + 0.7j, -1 + 1j, 4 + 0.3j])
print(f"lam_1 = {lam_k[-1]:.6f}: sigma2/sigma1 = {max(probe['ratio']):.1e}")

# %%
# The conformal coordinate rho maps the cut lam-plane onto |Re rho| < 1/2.
for l in (2, 1j, 1 + 1j):
    p = rhp.rho_of_lambda(l)
    print(f"lam = {l}: rho = {p.rho:.6f}, lam(rho) = {rhp.lambda_of_rho(p.rho):.6f}")
