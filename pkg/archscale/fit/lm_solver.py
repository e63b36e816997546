# Copyright (c) 2025 The archscale developers
# archscale is open-source software under the GPL-2.0 license

"""
A damped Gauss-Newton (Levenberg-Marquardt) least-squares solver with
a central finite-difference Jacobian.
"""

__all__ = [
    'LMResult',
    'levenberg_marquardt',
    'jacobian',
]

import numpy as np
import scipy.linalg as la


class LMResult():
    """
    Output of levenberg_marquardt().

    Attributes
    ----------
    theta: 1D float array
        Final parameter vector.
    residuals: 1D float array
        Residual vector at theta.
    ssr: Float
        Sum of squared residuals at theta.
    converged: Bool
        Whether a convergence criterion was met.
    iterations: Integer
        Number of iterations taken.
    history: List of floats
        Objective value after each accepted step (starting value first).
    message: String
        Reason for stopping.
    """
    def __init__(
        self, theta, residuals, ssr, converged, iterations, history, message,
    ):
        self.theta = theta
        self.residuals = residuals
        self.ssr = ssr
        self.converged = converged
        self.iterations = iterations
        self.history = history
        self.message = message

    def __str__(self):
        status = 'converged' if self.converged else 'did not converge'
        return (
            f'Levenberg-Marquardt {status} after {self.iterations} '
            f'iterations ({self.message}), SSR = {self.ssr:.6e}'
        )


def jacobian(residual_func, theta, step=1e-6):
    """
    Central finite-difference Jacobian of a residual function.
    The step for parameter j is step*(1+|theta_j|).

    Returns
    -------
    jac: 2D float array
        Shape [n_residuals, n_params].
    """
    theta = np.asarray(theta, dtype=float)
    columns = []
    for j in range(len(theta)):
        h = step * (1.0 + np.abs(theta[j]))
        upper = np.copy(theta)
        lower = np.copy(theta)
        upper[j] += h
        lower[j] -= h
        diff = residual_func(upper) - residual_func(lower)
        columns.append(diff / (upper[j]-lower[j]))
    return np.stack(columns, axis=1)


def levenberg_marquardt(
        residual_func, theta0, max_iterations=500,
        residual_tolerance=1e-10, param_tolerance=1e-8,
        initial_damping=1e-3, damping_up=10.0, damping_down=0.1,
        fd_step=1e-6,
    ):
    """
    Minimize sum(residual_func(theta)**2) with Levenberg-Marquardt.

    Each iteration solves (J'J + mu*I) step = -J'r.  A step is accepted
    only if it lowers the objective, in which case mu is multiplied
    by damping_down; otherwise mu is multiplied by damping_up.  The
    initial damping is initial_damping*max(diag(J'J)).

    Convergence is declared when any of these holds:
    - the objective is <= residual_tolerance,
    - an accepted step lowers the objective by a relative amount
      <= residual_tolerance,
    - the step size is <= param_tolerance*(|theta| + param_tolerance).

    A singular or non-finite linear system stops the iteration without
    convergence; estimates are never patched up.

    Parameters
    ----------
    residual_func: Callable
        Function of a 1D parameter array returning the residual array.
    theta0: 1D float iterable
        Starting parameters.
    max_iterations: Integer
    residual_tolerance: Float
    param_tolerance: Float
    initial_damping: Float
    damping_up: Float
        Factor (> 1) applied to the damping after a rejected step.
    damping_down: Float
        Factor in (0, 1) applied to the damping after an accepted step.
    fd_step: Float
        Relative finite-difference step of the Jacobian.

    Returns
    -------
    result: LMResult

    Examples
    --------
    >>> import numpy as np
    >>> from archscale.fit import levenberg_marquardt
    >>> x = np.linspace(0.0, 1.0, 20)
    >>> y = 2.0*np.exp(-1.5*x)
    >>> def residuals(theta):
    >>>     return theta[0]*np.exp(-theta[1]*x) - y
    >>> fit = levenberg_marquardt(residuals, [1.0, 1.0])
    >>> print(fit.theta)
    [2.  1.5]
    """
    theta = np.array(theta0, dtype=float)
    n_params = len(theta)
    residuals = np.asarray(residual_func(theta), dtype=float)
    if not np.all(np.isfinite(residuals)):
        return LMResult(
            theta, residuals, np.inf, False, 0, [np.inf],
            'non-finite residuals at the starting point',
        )
    ssr = float(residuals @ residuals)
    history = [ssr]

    if ssr <= residual_tolerance:
        return LMResult(
            theta, residuals, ssr, True, 0, history, 'objective below tolerance',
        )

    jac = jacobian(residual_func, theta, fd_step)
    hessian = jac.T @ jac
    gradient = jac.T @ residuals
    diag_max = np.amax(np.diag(hessian)) if n_params > 0 else 0.0
    scale = diag_max if diag_max > 0 else 1.0
    damping = initial_damping * scale
    # Keeps J'J + mu*I well conditioned when a parameter has no effect
    min_damping = 1e-12 * scale

    converged = False
    message = 'maximum number of iterations reached'
    iteration = 0
    for iteration in range(1, max_iterations+1):
        system = hessian + damping*np.eye(n_params)
        if not np.all(np.isfinite(system)):
            message = 'non-finite normal equations'
            break
        try:
            step = la.solve(system, -gradient, assume_a='pos')
        except (la.LinAlgError, ValueError):
            message = 'singular normal equations'
            break
        if not np.all(np.isfinite(step)):
            message = 'singular normal equations'
            break

        step_norm = np.linalg.norm(step)
        theta_norm = np.linalg.norm(theta)
        if step_norm <= param_tolerance*(theta_norm + param_tolerance):
            converged = True
            message = 'parameter step below tolerance'
            break

        trial = theta + step
        trial_residuals = np.asarray(residual_func(trial), dtype=float)
        trial_ssr = float(trial_residuals @ trial_residuals)
        if np.isfinite(trial_ssr) and trial_ssr < ssr:
            reduction = (ssr - trial_ssr) / ssr
            theta = trial
            residuals = trial_residuals
            ssr = trial_ssr
            history.append(ssr)
            damping = max(damping*damping_down, min_damping)
            if ssr <= residual_tolerance:
                converged = True
                message = 'objective below tolerance'
                break
            if reduction <= residual_tolerance:
                converged = True
                message = 'relative objective reduction below tolerance'
                break
            jac = jacobian(residual_func, theta, fd_step)
            hessian = jac.T @ jac
            gradient = jac.T @ residuals
        else:
            damping *= damping_up
            if not np.isfinite(damping):
                message = 'damping overflow'
                break

    return LMResult(
        theta, residuals, ssr, converged, iteration, history, message,
    )
