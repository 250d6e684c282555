"""
Interpretations of weight terms.

An `Interpretation` assigns to every weight operator an `EvalRule` that combines the
weight functions of its children into a weight function over process terms, and
embeds process terms as Dirac functions (`base`). Interpreting a target with an
environment for its weight-function variables and then applying the process
substitution to the keys realizes the instantiated interpretation of a rule target.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from wfsosWB.syntax import (
    MetaVar,
    Signature,
    Term,
    TermKind,
    apply_subst,
    fill_holes,
    format_param,
)
from wfsosWB.utils import InterpretationError
from wfsosWB.weights import (
    INF,
    RAT_INF_PLUS,
    Weight,
    WeightFn,
    WeightMonoid,
    canonical_key,
    substitute,
    wdiv,
    wmin,
    wmul,
)
from wfsosWB.wexpr import Expr

EvalFn = Callable[[Term, Sequence[WeightFn], WeightMonoid], WeightFn]


@dataclass(frozen=True)
class EvalRule:
    """The evaluation rule of one weight operator."""

    name: str
    fn: EvalFn = field(compare=False)
    args: Tuple[Any, ...] = ()

    def __call__(self, node: Term, children: Sequence[WeightFn], monoid: WeightMonoid) -> WeightFn:
        return self.fn(node, children, monoid)

    def __str__(self) -> str:
        if self.name == "pointwise":
            return f'pointwise "{self.args[0]}"'
        if not self.args:
            return self.name
        return f"{self.name}(" + ",".join(format_param(a) for a in self.args) + ")"


def _accumulate(entries: Sequence[Tuple[Any, Any]], monoid: WeightMonoid) -> WeightFn:
    try:
        return WeightFn(entries, monoid)
    except ValueError as e:
        raise InterpretationError(f"Result is not a weight of {monoid.id}: {e}") from e


def _numeric_param(node: Term, i: int) -> Any:
    if i >= len(node.params):
        raise InterpretationError(f"{node.name} needs a weight parameter at position {i + 1}.")
    p = node.params[i]
    if isinstance(p, MetaVar):
        raise InterpretationError(f"Parameter {p} of {node.name} is unbound.")
    if isinstance(p, Expr):
        return p.evaluate()
    return p


def _arity(node: Term, children: Sequence[WeightFn], n: int) -> None:
    if len(children) != n:
        raise InterpretationError(f"{node.name} expects {n} argument(s), got {len(children)}.")


def _zero(node: Term, children: Sequence[WeightFn], m: WeightMonoid) -> WeightFn:
    return WeightFn.zero(m)


def _reshape(node: Term, children: Sequence[WeightFn], m: WeightMonoid) -> WeightFn:
    _arity(node, children, 1)
    r = _numeric_param(node, 0)
    child = children[0]
    n = len(child)
    if n == 0:
        return WeightFn.zero(m)
    share = wdiv(r, n)
    return _accumulate([(t, share) for t in child], m)


def _pointwise_sum(node: Term, children: Sequence[WeightFn], m: WeightMonoid) -> WeightFn:
    out = WeightFn.zero(m)
    for c in children:
        out = out + c
    return out


def _coop(sigma_op: str, combine: Callable[[Weight, Weight, Weight, Weight], Any]) -> EvalFn:
    def fn(node: Term, children: Sequence[WeightFn], m: WeightMonoid) -> WeightFn:
        _arity(node, children, 2)
        left, right = children
        tot_l, tot_r = left.total(), right.total()
        if m.is_zero(tot_l) or m.is_zero(tot_r):
            return WeightFn.zero(m)
        entries = []
        for t1, w1 in left.sorted_items():
            for t2, w2 in right.sorted_items():
                key = Term.op(sigma_op, t1, t2, params=node.params)
                entries.append((key, combine(w1, w2, tot_l, tot_r)))
        return _accumulate(entries, m)

    return fn


def _min_law(w1: Weight, w2: Weight, tot1: Weight, tot2: Weight) -> Any:
    return wmul(wmul(wdiv(w1, tot1), wdiv(w2, tot2)), wmin(tot1, tot2))


def _product_law(w1: Weight, w2: Weight, tot1: Weight, tot2: Weight) -> Any:
    return wmul(w1, w2)


def _dirac(weight: Any) -> EvalFn:
    def fn(node: Term, children: Sequence[WeightFn], m: WeightMonoid) -> WeightFn:
        _arity(node, children, 1)
        child = children[0]
        if child.is_zero:
            return WeightFn.zero(m)
        w = _numeric_param(node, 0) if weight is None else weight
        total = child.total()
        return _accumulate([(t, wmul(w, wdiv(v, total))) for t, v in child.sorted_items()], m)

    return fn


def _convex(node: Term, children: Sequence[WeightFn], m: WeightMonoid) -> WeightFn:
    if len(node.params) != len(children):
        raise InterpretationError(
            f"{node.name} has {len(node.params)} coefficient(s) for {len(children)} argument(s)."
        )
    entries = []
    for i, child in enumerate(children):
        c = _numeric_param(node, i)
        entries.extend((t, wmul(c, w)) for t, w in child.sorted_items())
    return _accumulate(entries, m)


def _colour(node: Term, children: Sequence[WeightFn], m: WeightMonoid) -> WeightFn:
    _arity(node, children, 1)
    return children[0]


def _lift(node: Term, children: Sequence[WeightFn], m: WeightMonoid) -> WeightFn:
    if len(node.params) != 2:
        raise InterpretationError(f"{node.name} expects a function and a template parameter.")
    beta, template = node.params
    if not isinstance(beta, Expr) or not isinstance(template, Term):
        raise InterpretationError(f"{node.name} parameters are unbound or malformed.")
    entries = []
    for choice in product(*(c.sorted_items() for c in children)):
        key = fill_holes(template, [t for t, _ in choice])
        env = {f"u{k}": w for k, (_, w) in enumerate(choice, start=1)}
        entries.append((key, beta.evaluate(env)))
    return _accumulate(entries, m)


def _pointwise(expr: Expr) -> EvalFn:
    def fn(node: Term, children: Sequence[WeightFn], m: WeightMonoid) -> WeightFn:
        functions = {f"v{k}": c for k, c in enumerate(children, start=1)}
        params = {f"p{k}": p for k, p in enumerate(node.params, start=1)}
        points = sorted({t for c in children for t in c}, key=canonical_key)
        entries = []
        for t in points:
            env: Dict[str, Any] = dict(params)
            env.update({name: c(t) for name, c in functions.items()})
            entries.append((t, expr.evaluate(env, functions)))
        return _accumulate(entries, m)

    return fn


def _guard(node: Term, children: Sequence[WeightFn], m: WeightMonoid) -> WeightFn:
    _arity(node, children, 1)
    cond = node.params[0] if node.params else None
    if not isinstance(cond, Expr):
        raise InterpretationError(f"{node.name} needs a condition parameter.")
    return children[0] if cond.holds() else WeightFn.zero(m)


_ALIASES = {
    "dirac": "dirac_process",
    "convex": "convex_combination",
    "lift": "multiadditive_apply",
    "when": "guard",
    "sum": "pointwise_sum",
}

BUILTINS = (
    "zero",
    "reshape",
    "pointwise_sum",
    "coop_min_law",
    "coop_product_law",
    "dirac_process",
    "convex_combination",
    "colour",
    "multiadditive_apply",
    "pointwise",
    "guard",
)


def builtin(name: str, *args: Any) -> EvalRule:
    """Return the evaluation rule of a catalogued combinator.

    Parameters
    ----------
    name: str
        One of `BUILTINS` (or an alias: dirac, convex, lift, when, sum).

    args:
        `coop_min_law`/`coop_product_law` take the process operator built at each
        pair of support points (default "coop"); `dirac_process` takes the weight
        assigned to the process term (taken from the node parameter when omitted);
        `pointwise` takes a WeightExpr over `v1..vk`.
    """
    key = _ALIASES.get(name, name)
    if key == "zero":
        return EvalRule(key, _zero)
    if key == "reshape":
        return EvalRule(key, _reshape)
    if key == "pointwise_sum":
        return EvalRule(key, _pointwise_sum)
    if key in ("coop_min_law", "coop_product_law"):
        sigma_op = str(args[0]) if args else "coop"
        law = _min_law if key == "coop_min_law" else _product_law
        return EvalRule(key, _coop(sigma_op, law), (sigma_op,))
    if key == "dirac_process":
        weight = args[0] if args else None
        return EvalRule(key, _dirac(weight), tuple(args[:1]))
    if key == "convex_combination":
        return EvalRule(key, _convex)
    if key == "colour":
        return EvalRule(key, _colour)
    if key == "multiadditive_apply":
        return EvalRule(key, _lift)
    if key == "pointwise":
        if not args:
            raise InterpretationError("pointwise needs an expression.")
        expr = Expr.of(args[0])
        return EvalRule(key, _pointwise(expr), (expr,))
    if key == "guard":
        return EvalRule(key, _guard)
    raise InterpretationError(f"Unknown builtin '{name}'. Must be one of {list(BUILTINS)}")


@dataclass
class Interpretation:
    """Evaluation rules for the weight signature plus the Dirac embedding of process
    terms (`base_weight` is the weight assigned to the embedded term)."""

    name: str
    theta: Signature
    rules: Dict[str, EvalRule]
    base_weight: Any = INF
    monoid: WeightMonoid = RAT_INF_PLUS

    def base(self, t: Term) -> WeightFn:
        return WeightFn.dirac(t, self.base_weight, self.monoid)

    def evaluate(self, psi: Term, env: Mapping[str, WeightFn]) -> WeightFn:
        if psi.kind is TermKind.WeightVar:
            try:
                return env[psi.name]
            except KeyError as e:
                raise InterpretationError(f"No binding for weight variable %{psi.name}.") from e
        if psi.kind is TermKind.Hole:
            raise InterpretationError(f"Unfilled hole {psi} in weight term.")
        if psi.kind is TermKind.ProcessVar or psi.name not in self.theta:
            return self.base(psi)
        rule = self.rules.get(psi.name)
        if rule is None:
            raise InterpretationError(f"Weight operator '{psi.name}' has no eval rule.")
        children = [self.evaluate(c, env) for c in psi.children]
        return rule(psi, children, self.monoid)

    def describe(self) -> List[Tuple[str, str]]:
        return [(name, str(rule)) for name, rule in sorted(self.rules.items())]


def interpret(
    interp: Interpretation,
    psi: Term,
    env: Optional[Mapping[str, WeightFn]] = None,
    subst: Optional[Mapping[Any, Term]] = None,
) -> WeightFn:
    """Evaluate the weight term `psi` and rename the resulting keys by `subst`.

    Parameters
    ----------
    interp: Interpretation
        The interpretation of the weight signature.

    psi: Term
        Weight term over process variables and weight-function variables.

    env: Mapping[str, WeightFn]
        Weight function bound to each weight-function variable (by name).

    subst: Mapping[var, Term]
        Process substitution applied to the support of the result.

    Returns
    -------
    rho: WeightFn
        Canonical weight function over process terms.
    """
    result = interp.evaluate(psi, env or {})
    if not subst:
        return result
    return substitute(result, lambda t: apply_subst(t, subst))


def build_from_recursion(
    theta: Signature,
    h: Mapping[str, Union[EvalRule, EvalFn]],
    base_weight: Any = INF,
    monoid: WeightMonoid = RAT_INF_PLUS,
    name: str = "interp",
) -> Interpretation:
    """The unique interpretation agreeing with `h` on operators and embedding process
    terms with weight `base_weight`.

    Raises
    ------
    InterpretationError
        If some operator of `theta` has no rule in `h`.
    """
    missing = sorted(op.name for op in theta if op.name not in h)
    if missing:
        raise InterpretationError(f"Interpretation '{name}' has no rule for {missing}.")
    rules: Dict[str, EvalRule] = {}
    for op, rule in h.items():
        rules[op] = rule if isinstance(rule, EvalRule) else EvalRule(op, rule)
    try:
        base = monoid.coerce(base_weight)
    except ValueError as e:
        raise InterpretationError(f"Base weight {base_weight} is not in {monoid.id}.") from e
    return Interpretation(name, theta, rules, base, monoid)


def check_naturality(
    interp: Interpretation,
    psi: Term,
    env: Mapping[str, WeightFn],
    sigma: Mapping[Any, Term],
) -> bool:
    """Compare renaming after interpretation with interpretation after renaming."""
    rename: Callable[[Any], Any] = lambda t: apply_subst(t, sigma)
    left = substitute(interp.evaluate(psi, env), rename)
    moved_env = {k: substitute(v, rename) for k, v in env.items()}
    right = interp.evaluate(apply_subst(psi, sigma), moved_env)
    return left == right
