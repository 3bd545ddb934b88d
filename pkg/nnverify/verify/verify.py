"""
Verification driver: abstract the precondition, analyze the network in a
domain and check the postcondition against the abstract output, or decide
the negated verification condition with one of the solvers
"""
import logging
import time

from dataclasses import dataclass
from fractions import Fraction
from functools import partial
from multiprocessing import Pool
from typing import (
    NamedTuple,
    Optional,
    Tuple
)

from ..errors import (
    DomainError,
    PropertyError,
    UnsupportedProperty
)
from ..domains import (
    Box,
    Interval,
    iv_analyze,
    poly_analyze,
    Polyhedron,
    to_box,
    zono_analyze,
    Zonotope
)
from ..graph import (
    argmax_class,
    evaluate
)
from ..lra import (
    Atom,
    build_reluplex_vcs,
    build_vc,
    DefaultCuts,
    DefaultDelta,
    dpllt_solve,
    lra_nnf,
    reluplex_solve
)
from ..props import (
    check_counterexample,
    ClassEquals,
    desugar,
    LinfBall,
    robustness_property
)
from ..sat import (
    And,
    Const,
    Not,
    Or
)


Logger = logging.getLogger(__name__)

Domains = ('interval', 'zonotope', 'polyhedron')
Solvers = ('smt', 'reluplex')
Methods = Solvers + Domains

Proven  = 'proven'
Unknown = 'unknown'
Refuted = 'refuted'

ExitCodes = {
    Proven : 0,
    Refuted: 1,
    Unknown: 2
}


@dataclass
class Verdict:
    """
    Outcome of one verification call. `pair` is the (label, other class)
    the class check failed on, `delta` marks a solver model found with strict
    atoms shifted by the margin (Proven verdicts never rest on it), `inexact`
    marks a precondition that was over-approximated before the analysis
    """
    status: str
    method: str
    reason: str = ''
    pair: Optional[Tuple[int, int]] = None
    counterexample: Optional[dict] = None
    bounds: Optional[list] = None
    delta: bool = False
    inexact: bool = False
    timing: float = 0.
    name: str = ''

    @property
    def proven(self):
        return self.status == Proven

    @property
    def exit_code(self):
        return ExitCodes[self.status]

    def to_dict(self):
        data = {
            'verdict': self.status,
            'method' : self.method,
            'delta'  : self.delta,
            'inexact': self.inexact,
            'timing' : round(self.timing, 6)
        }
        if self.name:
            data['property'] = self.name
        if self.reason:
            data['reason'] = self.reason
        if self.pair:
            data['pair'] = list(self.pair)
        if self.bounds is not None:
            data['bounds'] = [[b.lo, b.hi] for b in self.bounds]
        if self.counterexample is not None:
            data['counterexample'] = self.counterexample
        return data


#%%
class Abstraction(NamedTuple):
    element: object
    exact: bool


def abstract_box(box, domain):
    """
    A box of (lo, hi) pairs as an element of the domain, represented exactly

    Parameters
    ----------
    box: list
        (lo, hi) pairs or Intervals
    domain: str
        interval, zonotope or polyhedron
    """
    if domain == 'interval':
        return Box(tuple(to_box(box)))
    if domain == 'zonotope':
        return Zonotope.from_box(box)
    if domain == 'polyhedron':
        return Polyhedron.from_box(box)
    raise DomainError(f'Unknown domain {domain!r}, expected one of {Domains}')


def abstract_linf_ball(center, eps, domain):
    """
    ||x - center||_inf <= eps, exact in all three domains

    Examples
    --------
    The zonotope of center (0, 0) with eps 1 is (⟨0, 1, 0⟩, ⟨0, 0, 1⟩)
    """
    eps = Fraction(eps)
    if eps < 0:
        raise DomainError(f'The radius must not be negative, got {eps}')
    box = [(Fraction(c) - eps, Fraction(c) + eps) for c in center]
    return Abstraction(abstract_box(box, domain), True)


def abstract_l2_ball(center, eps, domain):
    """
    ||x - center||_2 <= eps through its tightest enclosing box, flagged as
    inexact
    """
    eps = Fraction(eps)
    if eps < 0:
        raise DomainError(f'The radius must not be negative, got {eps}')
    box = [(Fraction(c) - eps, Fraction(c) + eps) for c in center]
    return Abstraction(abstract_box(box, domain), False)


def abstract_synonyms(sets):
    """
    Per-dimension [min S_i, max S_i] of finite value sets
    """
    box = []
    for i, s in enumerate(sets):
        s = [Fraction(v) for v in s]
        if not s:
            raise DomainError(f'Value set {i} is empty')
        box.append((min(s), max(s)))
    return abstract_box(box, 'interval')


def analyze(g, element):
    """
    Runs the analysis matching the element's domain
    """
    if isinstance(element, Box):
        return iv_analyze(g, element)
    if isinstance(element, Zonotope):
        return zono_analyze(g, element)
    if isinstance(element, Polyhedron):
        return poly_analyze(g, element)
    raise DomainError(f'Not an abstract element: {type(element).__name__}')


def domain_of(element):
    for domain, cls in zip(Domains, (Box, Zonotope, Polyhedron)):
        if isinstance(element, cls):
            return domain
    raise DomainError(f'Not an abstract element: {type(element).__name__}')


#%%
def check_class(out, label):
    """
    Proves that every point of an abstract output is classified as `label`:
    for each other class i the lower bound of out_label - out_i must be
    strictly positive

    Parameters
    ----------
    out: Box, Zonotope or Polyhedron
    label: int
        1-based class

    Returns
    -------
    Verdict
        Proven or Unknown with the first failing (label, i) pair

    Examples
    --------
    ([0.1, 0.2], [0.3, 0.4]) is Proven for class 2, ([0.1, 0.2], [0.15, 0.4])
    is Unknown
    """
    method = domain_of(out)
    n = len(out)
    if not 1 <= label <= n:
        raise PropertyError(f'Label {label} is out of range for {n} output(s)')

    y = label - 1
    for i in range(n):
        if i == y:
            continue
        b = out.linear_bounds({y: 1, i: -1})
        if not b.lo > 0:
            Logger.debug(f'check_class: out[{y}] - out[{i}] in {b}')
            return Verdict(Unknown, method, f'class {label} is not separated from class {i + 1}: difference in {b}', pair=(label, i + 1))
    return Verdict(Proven, method)


def _implied(c, out, index):
    """
    Whether the output bounds imply a linear atom over output scalars
    """
    coeffs = {}
    for var, k in c.coeffs:
        if var not in index:
            raise UnsupportedProperty(f'Postcondition atom {c} refers to {var}, only network outputs can be checked by bounds')
        coeffs[index[var]] = k

    b = out.linear_bounds(coeffs, -c.bound) if coeffs else Interval.point(-c.bound)
    holds = {
        '<=': b.hi <= 0,
        '<' : b.hi < 0,
        '>=': b.lo >= 0,
        '>' : b.lo > 0,
        '=' : b.lo == b.hi == 0
    }[c.rel]
    return holds, b


def _prove(phi, out, index):
    """
    Checks a postcondition against abstract output bounds. Returns whether
    it is proven, the failing class pair if any, and a reason
    """
    if isinstance(phi, ClassEquals):
        v = check_class(out, phi.label)
        return v.proven, v.pair, v.reason
    if isinstance(phi, Const):
        return phi.value, None, '' if phi.value else 'the postcondition is false'
    if isinstance(phi, Atom):
        holds, b = _implied(phi.constraint, out, index)
        return holds, None, '' if holds else f'{phi.constraint} is not implied: left side minus bound in {b}'
    if isinstance(phi, Not):
        return _prove(lra_nnf(Not(desugar(phi.arg))), out, index)
    if isinstance(phi, And):
        left = _prove(phi.left, out, index)
        if not left[0]:
            return left
        return _prove(phi.right, out, index)

    left = _prove(phi.left, out, index)
    if left[0]:
        return left
    right = _prove(phi.right, out, index)
    if right[0]:
        return right
    return False, left[1] or right[1], f'neither disjunct is implied ({left[2]}; {right[2]})'


def verify(p, method='interval'):
    """
    Abstract interpretation of a property with one network call: the input
    box implied by the precondition is analyzed in the domain and the
    postcondition is checked against the output

    The check is one-sided, the result is never Refuted

    Parameters
    ----------
    p: Property
    method: str, default='interval'
        interval, zonotope or polyhedron

    Returns
    -------
    Verdict

    Raises
    ------
    UnsupportedProperty
        More than one network call, an unbounded input or a postcondition
        over anything but the network outputs
    """
    if method not in Domains:
        raise DomainError(f'Unknown domain {method!r}, expected one of {Domains}')
    if len(p.assign) != 1:
        raise UnsupportedProperty(f'Abstract interpretation needs exactly one network call, got {len(p.assign)}')

    a   = p.assign[0]
    box = p.input_box(a.inp)
    if box is None:
        raise UnsupportedProperty(f'The precondition does not bound every component of {a.inp}')

    inexact = any(len(c.coeffs) != 1 for c in p.pre) or any(not isinstance(r, LinfBall) for r in p.regions)
    if any(lo > hi for lo, hi in box):
        return Verdict(Proven, method, 'the precondition is empty', inexact=inexact)

    element = abstract_box(box, method)
    out     = analyze(a.net, element)
    index   = {f'{a.out}[{j}]': j for j in range(len(a.net.outputs))}
    proven, pair, reason = _prove(p.post, out, index)

    Logger.debug(f'verify: {method} bounds {[str(b) for b in out.bounds()]}')
    return Verdict(
        status  = Proven if proven else Unknown,
        method  = method,
        reason  = reason,
        pair    = pair,
        bounds  = out.bounds(),
        inexact = inexact
    )


def verify_robustness(net, center, eps, label=None, method='interval', norm='linf', **kwargs):
    """
    Local robustness of a single network around a center. The abstract
    domains analyze the ball directly, the solvers go through the
    robustness property

    Parameters
    ----------
    net: Graph
    center: sequence
    eps: rational
    label: int, default=None
        1-based class, by default the class of the center
    method: str, default='interval'
    norm: str, default='linf'
        linf or l2
    **kwargs
        Passed on to run_verification for the solver methods
    """
    if method in Solvers:
        return run_verification(robustness_property(net, center, eps, label, norm), method, **kwargs)

    if label is None:
        label = argmax_class(evaluate(net, [Fraction(c) for c in center])).index

    if norm == 'linf':
        element, exact = abstract_linf_ball(center, eps, method)
    elif norm == 'l2':
        element, exact = abstract_l2_ball(center, eps, method)
    else:
        raise PropertyError(f'Unknown norm {norm!r}')

    start = time.perf_counter()
    out   = analyze(net, element)
    v     = check_class(out, label)
    v.bounds  = out.bounds()
    v.inexact = not exact
    v.timing  = time.perf_counter() - start
    return v


#%%
def _solver_verdict(p, result, method, exact=None):
    """
    Turns a solver result on the negated verification condition into a
    verdict, re-validating any model by running the networks. An Unsat that
    only rules out models with margin delta is decided again by `exact`,
    which returns the result with strict atoms decided exactly
    """
    if not result and result.delta:
        Logger.debug(f'{method}: unsat with margin delta, deciding the strict atoms exactly')
        result = exact()

    if not result:
        return Verdict(Proven, method, 'verification condition is unsat')

    cex = check_counterexample(p, p.vectors(result.model))
    if cex:
        return Verdict(Refuted, method, 'counterexample', counterexample=cex.vectors, delta=result.delta)

    Logger.debug(f'{method}: spurious model, {cex.reason}')
    return Verdict(Unknown, method, f'spurious solver model: {cex.reason}', delta=result.delta)


def _exact_smt(p):
    return dpllt_solve(build_vc(p), None)


def verify_smt(p, delta=DefaultDelta, cuts=DefaultCuts):
    """
    Decides the negated verification condition with DPLL(T). A model is
    only reported as Refuted after the networks confirm it concretely;
    models the sigmoid bands or region boxes admit spuriously give Unknown.
    Proven never rests on the margin: a δ-unsat result is decided again
    with the strict atoms checked exactly

    Parameters
    ----------
    p: Property
    delta: Fraction, default=DefaultDelta
    cuts: sequence, default=DefaultCuts
        Sigmoid band cut points

    Returns
    -------
    Verdict
    """
    phi    = build_vc(p, cuts)
    result = dpllt_solve(phi, Fraction(delta))
    return _solver_verdict(p, result, 'smt', lambda: dpllt_solve(phi, None))


def verify_reluplex(p, tau=5, delta=DefaultDelta, warm_start=False):
    """
    Decides every Reluplex problem of the negated verification condition.
    The property is Proven when all are unsat and Refuted on the first
    model that is a real counterexample.

    A problem that is only unsat with margin delta is solved again with its
    strict atoms closed. When that admits a model that is no counterexample,
    the property is decided by DPLL(T) with exact strict atoms

    Parameters
    ----------
    p: Property
    tau: int, default=5
    delta: Fraction, default=DefaultDelta
    warm_start: bool, default=False
        Fix ReLUs that interval analysis proves stable

    Returns
    -------
    Verdict
    """
    relaxed  = []
    spurious = None
    for k, problem in enumerate(build_reluplex_vcs(p, tau, Fraction(delta), warm_start)):
        result = reluplex_solve(problem)
        if not result:
            if result.delta:
                relaxed.append(k)
            continue

        v = _solver_verdict(p, result, 'reluplex')
        if v.status == Refuted:
            return v
        Logger.debug(f'reluplex: problem {k} gave a spurious model')
        spurious = spurious or v

    if relaxed:
        closed = build_reluplex_vcs(p, tau, Fraction(0), warm_start)
        for k in relaxed:
            result = reluplex_solve(closed[k])
            if not result:
                continue

            Logger.debug(f'reluplex: problem {k} is sat with its strict atoms closed')
            v = _solver_verdict(p, result, 'reluplex')
            if v.status == Refuted:
                return v
            return _solver_verdict(p, _exact_smt(p), 'reluplex')

    if spurious:
        return spurious
    return Verdict(Proven, 'reluplex', 'every problem is unsat')


def run_verification(p, method='smt', delta=DefaultDelta, tau=5, warm_start=False, cuts=DefaultCuts, fallback=False, name=''):
    """
    Verifies a property with the chosen method and times the call

    Parameters
    ----------
    p: Property
    method: str, default='smt'
        smt, reluplex, interval, zonotope or polyhedron
    delta, tau, warm_start, cuts
        Solver options, see verify_smt and verify_reluplex
    fallback: bool, default=False
        Fall back to the SMT path when the abstract domains cannot handle
        the property's shape
    name: str, default=''
        Reported with the verdict

    Returns
    -------
    Verdict
    """
    if method not in Methods:
        raise PropertyError(f'Unknown method {method!r}, expected one of {Methods}')

    start = time.perf_counter()
    if method == 'smt':
        v = verify_smt(p, delta, cuts)
    elif method == 'reluplex':
        v = verify_reluplex(p, tau, delta, warm_start)
    else:
        try:
            v = verify(p, method)
        except UnsupportedProperty as e:
            if not fallback:
                raise
            Logger.warning(f'{e}, falling back to the SMT path')
            v = verify_smt(p, delta, cuts)
            v.reason = f'{method} unsupported ({e}); {v.reason}'

    v.timing = time.perf_counter() - start
    v.name   = name
    Logger.info(f'{name or "property"}: {v.status} by {v.method} in {v.timing:.3f}s')
    return v


def eps_sweep(net, center, label=None, method='interval', start=Fraction(1, 100), steps=8, norm='linf', **kwargs):
    """
    Largest radius for which local robustness is proven: the radius is
    doubled while it is proven, then the boundary is bisected

    Parameters
    ----------
    net: Graph
    center: sequence
    label: int, default=None
    method: str, default='interval'
    start: Fraction, default=1/100
        First radius tried
    steps: int, default=8
        Maximum doublings, and bisection steps after them

    Returns
    -------
    eps: Fraction
        Largest radius proven, 0 when none was
    verdict: Verdict or None
        The verdict for that radius
    """
    check = lambda eps: verify_robustness(net, center, eps, label, method, norm, **kwargs)

    lo, best = Fraction(0), None
    hi = Fraction(start)
    for _ in range(steps):
        v = check(hi)
        if not v.proven:
            break
        lo, best = hi, v
        hi *= 2
    else:
        Logger.info(f'eps_sweep: proven up to {lo} without a failure')
        return lo, best

    for _ in range(steps):
        mid = (lo + hi) / 2
        v   = check(mid)
        if v.proven:
            lo, best = mid, v
        else:
            hi = mid

    Logger.info(f'eps_sweep: largest proven radius {lo}, first failure at most {hi}')
    return lo, best


def _task(options, item):
    name, p = item
    return run_verification(p, name=name, **options)


def verify_many(properties, jobs=1, **options):
    """
    Verifies independent properties, in a process pool when jobs > 1

    Parameters
    ----------
    properties: list
        (name, Property) pairs
    jobs: int, default=1
    **options
        Passed on to run_verification

    Returns
    -------
    verdicts: list
        In the order of the properties
    """
    task = partial(_task, options)
    if jobs <= 1 or len(properties) <= 1:
        return [task(item) for item in properties]

    pool = Pool(min(jobs, len(properties)))
    try:
        verdicts = pool.map(task, properties)
    finally:
        pool.close()
        pool.join()
    return verdicts
