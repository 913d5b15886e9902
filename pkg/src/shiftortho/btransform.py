"""Forward and inverse B-transform: per-depth-slice DFTs over the shift axes.

Within every depth slice the forward transform sums coefficients against
positive-sign complex exponentials over the shift indices, which equals the
shift count times an inverse FFT of that slice.  The pair block-diagonalizes
every cyclic shift correlation into independent per-frequency columns,
which is what makes the fast projection possible.  Any shift count is
supported; the FFT backend handles non power-of-two lengths.
"""

from __future__ import annotations

import os

import scipy.fft

from .lattice import CoeffTensor

_WORKERS = os.cpu_count() or 1


def b_transform(v: CoeffTensor) -> CoeffTensor:
    """Forward transform: ``out(i; j) = sum_l exp(+2*pi*i j.l / L) v(i; l)``."""
    domain = v.domain
    out = scipy.fft.ifftn(v.grid, axes=domain.shift_axes, workers=_WORKERS)
    out *= domain.shift_count
    return CoeffTensor._trusted(domain, out)


def b_inverse(p: CoeffTensor) -> CoeffTensor:
    """Inverse transform; ``b_inverse(b_transform(v)) == v`` up to rounding."""
    domain = p.domain
    out = scipy.fft.fftn(p.grid, axes=domain.shift_axes, workers=_WORKERS)
    out /= domain.shift_count
    return CoeffTensor._trusted(domain, out)
