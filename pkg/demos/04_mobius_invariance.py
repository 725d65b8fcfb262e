"""Real Mobius maps move configurations without changing the spectrum."""
# %%
import numpy as np

from multihilbert import discretize as dz
from multihilbert import geometry as geo
from multihilbert import spectral as sp

# An unbounded configuration cannot be gridded directly ...
cfg = geo.validate_configuration([[0, 1]], [[2, "inf"]])
print("endpoints:", cfg.endpoints)

# ... so move the point at infinity into a gap of U first.
m, image = geo.compactify(cfg)
print("map:", m)
print("image:", image.to_dict(), "doubles preserved:", image.n_double == cfg.n_double)

# %%
# Two different maps of the same configuration give the same eigenvalues.
shift = geo.MobiusMap.translation(3.0)
other = geo.mobius_image(shift.compose(m), cfg)
for c in (image, other):
    lam, _ = sp.eigenvalues_K(dz.assemble_K(c, dz.build_grid(c, 16)))
    print(c.to_dict(), "top eigenvalues:", np.array2string(lam[-3:], precision=10))

# %%
# The pull-back f -> f(m(x)) / (c x + d) is unitary on L2(R) and commutes with
# the Hilbert transform; check both for f = 1/(1 + x^2).
f = lambda x: 1 / (1 + np.asarray(x, dtype=float) ** 2)
Hf = lambda x: -np.asarray(x, dtype=float) / (1 + np.asarray(x, dtype=float) ** 2)
n = geo.MobiusMap(2.0, 1.0, 0.5, 1.3)
Uf = geo.mobius_conjugate_function(n, f)
print("norms:", geo.l2_norm(f), geo.l2_norm(Uf, [n.pole]))
x = np.array([-3.0, -0.5, 0.4, 2.0])
print("H(Uf):", dz.hilbert_transform_line(Uf, x))
print("U(Hf):", geo.mobius_conjugate_function(n, Hf)(x))
