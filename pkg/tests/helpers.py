import numpy as np

from pbsim.hilbert import DensityMatrix


def random_matrix(rng, n):
    return rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))


def random_density_matrix(rng, space):
    a = random_matrix(rng, space.dim)
    rho = a @ a.conj().T
    rho /= np.trace(rho)
    return DensityMatrix(space, (rho + rho.conj().T) / 2)
