# built-in
from dataclasses import dataclass
from logging import getLogger
from typing import Optional

# external
import numpy as np
from scipy import linalg, special

# app
from ._base import LogTarget
from ._constants import BRIDGE_MAX_ITER, BRIDGE_MIN_DRAWS, BRIDGE_TOL
from ._diagnostics import ess_bulk
from ._exceptions import EvidenceError, SingularityError
from ._sampler import Draws


logger = getLogger('hdprior')
LOG_2PI = np.log(2 * np.pi)


@dataclass
class BridgeResult:
    log_evidence: float
    iterations: int
    rel_change: float
    converged: bool
    mean: np.ndarray
    chol: np.ndarray

    def check(self) -> 'BridgeResult':
        if not self.converged:
            raise EvidenceError('bridge sampling did not converge after {} iterations (relative change {:.3g})'.format(
                self.iterations, self.rel_change))
        return self


class NormalProposal:
    def __init__(self, samples: np.ndarray):
        self.mean = samples.mean(axis=0)
        cov = np.atleast_2d(np.cov(samples, rowvar=False))
        try:
            self.chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            try:
                self.chol = np.linalg.cholesky(cov + 1e-8 * np.eye(cov.shape[0]))
            except np.linalg.LinAlgError:
                raise SingularityError('proposal covariance is singular') from None
        self.half_logdet = float(np.sum(np.log(np.diag(self.chol))))

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return self.mean + rng.standard_normal((n, self.dim)) @ self.chol.T

    def logpdf(self, x: np.ndarray) -> np.ndarray:
        z = linalg.solve_triangular(self.chol, (x - self.mean).T, lower=True)
        return -0.5 * self.dim * LOG_2PI - self.half_logdet - 0.5 * np.sum(z * z, axis=0)


def _iterate(l1: np.ndarray, l2: np.ndarray, n_eff: float, tol: float, max_iter: int):
    """Meng-Wong fixed point for the optimal bridge function, on the log scale."""
    n1, n2 = l1.shape[0], l2.shape[0]
    log_s1 = np.log(n_eff / (n_eff + n2))
    log_s2 = np.log(n2 / (n_eff + n2))
    l_star = np.median(l1)
    a, b = l2 - l_star, l1 - l_star
    log_r = np.log(0.5)
    rel_change = np.inf
    for iteration in range(1, max_iter + 1):
        log_num = a - np.logaddexp(log_s1 + a, log_s2 + log_r)
        log_den = -np.logaddexp(log_s1 + b, log_s2 + log_r)
        new = np.log(n1 / n2) + special.logsumexp(log_num) - special.logsumexp(log_den)
        if not np.isfinite(new):
            raise EvidenceError('bridge sampling produced a non-finite estimate')
        rel_change = abs(np.expm1(log_r - new))
        log_r = new
        if rel_change < tol:
            return log_r + l_star, iteration, rel_change, True
    return log_r + l_star, max_iter, rel_change, False


def bridge_sample(draws: Draws, target: LogTarget, seed: Optional[int] = None, tol: float = BRIDGE_TOL,
                  max_iter: int = BRIDGE_MAX_ITER, min_draws: int = BRIDGE_MIN_DRAWS) -> BridgeResult:
    """log of the normalising constant of `target`, from its posterior draws.

    The first half of every chain fits a normal proposal on the unconstrained
    scale; the second half and as many proposal draws enter the iteration.
    """
    if draws.n_draws < min_draws:
        raise EvidenceError('bridge sampling needs at least {} draws, got {}'.format(min_draws, draws.n_draws))
    half = draws.iterations // 2
    fit_part = draws.unconstrained[:, :half].reshape(-1, target.dim)
    iter_chains = draws.unconstrained[:, half:]
    iter_part = iter_chains.reshape(-1, target.dim)

    proposal = NormalProposal(fit_part)
    rng = np.random.default_rng(draws.seed if seed is None else seed)
    proposal_draws = proposal.draw(iter_part.shape[0], rng)

    q11 = np.array([target.log_density(u) for u in iter_part])
    q12 = proposal.logpdf(iter_part)
    q21 = np.array([target.log_density(u) for u in proposal_draws])
    q22 = proposal.logpdf(proposal_draws)

    n_eff = float(np.median([ess_bulk(iter_chains[:, :, j]) for j in range(target.dim)]))
    n_eff = min(max(n_eff, 1.0), float(iter_part.shape[0]))

    log_z, iterations, rel_change, converged = _iterate(q11 - q12, q21 - q22, n_eff, tol, max_iter)
    if converged:
        logger.info('bridge sampling converged in %d iterations: log Z = %.6f', iterations, log_z)
    else:
        logger.warning('bridge sampling stopped after %d iterations, relative change %.3g', iterations, rel_change)
    return BridgeResult(float(log_z), iterations, float(rel_change), converged, proposal.mean, proposal.chol)
