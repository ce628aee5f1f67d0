"""Change of scalars for spaces, good subspaces, and flows.

Restriction along an embedding F -> K re-blocks each compact K-coordinate
into [K:F] coordinates over F and replaces every matrix entry with its
multiplication matrix; induction along K -> L keeps the coordinate layout
and pushes entries through the embedding.  Entropy scales by the degree
under restriction and is unchanged under induction; ``verify_theorem``
checks both formulas together with the per-depth identities that drive
them.
"""

from __future__ import annotations

from dataclasses import dataclass

from .entropy import (
    DEFAULT_CONFIG,
    EngineConfig,
    EntropyEstimate,
    cotrajectory_run,
    ent_star,
)
from .errors import DimensionMismatch, FieldMismatch
from .fields import FieldEmbedding, FiniteField, least_irreducible, make_extension
from .linalg import Matrix, Subspace, block_expand, entry_embed, kronecker, rank
from .model import (
    EndoSpec,
    Flow,
    GoodSubspace,
    SpaceShape,
    default_window,
    make_bernoulli,
)

__all__ = [
    "res_flow",
    "res_good",
    "res_subspace",
    "ind_flow",
    "ind_good",
    "ind_subspace",
    "complete_tensor_finite",
    "adjunction_dim_check",
    "make_entropy_n",
    "verify_theorem",
    "TheoremReport",
]


# ---------------------------------------------------------------------------
# restriction
# ---------------------------------------------------------------------------


def res_flow(e: FieldEmbedding, flow: Flow) -> Flow:
    """View a flow over e.target as a flow over e.source.

    Compact coordinate i becomes the block [deg*i, deg*i + deg); stencil
    coefficients become their multiplication matrices spread across the
    block, so the result's stencil cycles through deg times more phases.
    """
    if flow.field != e.target:
        raise FieldMismatch("flow is not over the embedding's target field")
    deg = e.degree
    endo = flow.endo

    stencil: list[dict[int, int]] = []
    for rho in range(endo.period):
        reps = {k: e.rep(c) for k, c in endo.phase(rho)}
        for s in range(deg):
            phase: dict[int, int] = {}
            for k, rep in reps.items():
                for t in range(deg):
                    c = int(rep[s, t])
                    if c:
                        phase[deg * k + t - s] = c
            stencil.append(phase)

    endo_f = EndoSpec(
        e.source,
        stencil,
        prefix=block_expand(endo.prefix, e),
        dd=block_expand(endo.dd, e),
        cd=block_expand(endo.cd, e),
        dc=block_expand(endo.dc, e),
    )
    shape = SpaceShape(e.source, deg * flow.discrete_dim)
    return Flow(shape, endo_f, label=f"res[{e.source!r}]({flow.label})")


def res_good(e: FieldEmbedding, u: GoodSubspace) -> GoodSubspace:
    """Zero set of the restricted subspace: every coordinate inside a
    zeroed block is zeroed."""
    deg = e.degree
    return GoodSubspace(frozenset(deg * i + t for i in u.zero_set for t in range(deg)))


def res_subspace(e: FieldEmbedding, s: Subspace) -> Subspace:
    """The same point set in re-blocked source-field coordinates.

    For each basis vector v and each basis slot t the image contains the
    vector whose block j holds the source coordinates of v_j * basis[t];
    spanning over t gives exactly {coords of alpha * v : alpha in K}.
    """
    if s.field != e.target:
        raise FieldMismatch("subspace is not over the embedding's target field")
    deg = e.degree
    reps = e.rep_table()[s.basis.data]  # (dim, ambient, deg_s, deg_t)
    if s.dim == 0:
        return Subspace.zero(e.source, deg * s.ambient)
    rows = reps.transpose(0, 3, 1, 2).reshape(s.dim * deg, s.ambient * deg)
    return Subspace.from_rows(e.source, rows)


# ---------------------------------------------------------------------------
# induction
# ---------------------------------------------------------------------------


def ind_flow(e: FieldEmbedding, flow: Flow) -> Flow:
    """Extend scalars along e; the coordinate layout is unchanged."""
    if flow.field != e.source:
        raise FieldMismatch("flow is not over the embedding's source field")
    endo = flow.endo
    stencil = [
        {k: e.apply(c) for k, c in endo.phase(rho)} for rho in range(endo.period)
    ]

    endo_l = EndoSpec(
        e.target,
        stencil,
        prefix=entry_embed(endo.prefix, e),
        dd=entry_embed(endo.dd, e),
        cd=entry_embed(endo.cd, e),
        dc=entry_embed(endo.dc, e),
    )
    shape = SpaceShape(e.target, flow.discrete_dim)
    return Flow(shape, endo_l, label=f"ind[{e.target!r}]({flow.label})")


def ind_good(e: FieldEmbedding, u: GoodSubspace) -> GoodSubspace:
    return GoodSubspace(u.zero_set)


def ind_subspace(e: FieldEmbedding, s: Subspace) -> Subspace:
    """Same basis with embedded entries; echelon structure is preserved."""
    if s.field != e.source:
        raise FieldMismatch("subspace is not over the embedding's source field")
    if s.dim == 0:
        return Subspace.zero(e.target, s.ambient)
    return Subspace.from_rows(e.target, entry_embed(s.basis, e))


# ---------------------------------------------------------------------------
# finite tensor levels and the adjunction count
# ---------------------------------------------------------------------------


def complete_tensor_finite(a: int, b: int, f: Matrix, g: Matrix) -> tuple[int, Matrix]:
    """One finite level of the completed tensor product: the level has
    dimension a*b and the transition map is the Kronecker product."""
    if f.field != g.field:
        raise FieldMismatch("tensor factors live over different fields")
    if f.cols != a or g.cols != b:
        raise DimensionMismatch("maps do not act on spaces of the stated dimensions")
    return a * b, kronecker(f, g)


def adjunction_dim_check(e: FieldEmbedding, a: int, b: int) -> bool:
    """Dimension count of the hom-space adjunction for finite levels.

    Maps out of the induced a-dimensional space into a b-dimensional space
    over the big field form an (a*b)-dimensional space over L; maps into
    the restricted space form an (a * [L:K] * b)-dimensional space over K.
    They agree after normalizing by the degree.
    """
    if a < 0 or b < 0:
        raise DimensionMismatch("dimensions must be non-negative")
    deg = e.degree
    dim_ind = rank(entry_embed(Matrix.eye(e.source, a), e))
    dim_res = rank(block_expand(Matrix.eye(e.target, b), e))
    hom_l = dim_ind * b
    hom_k = a * dim_res
    return hom_l * deg == hom_k and dim_ind == a and dim_res == deg * b


# ---------------------------------------------------------------------------
# entropy-n generator
# ---------------------------------------------------------------------------


def make_entropy_n(field: FiniteField, n: int) -> Flow:
    """A flow over ``field`` with entropy exactly n: restrict the shift on a
    degree-n extension back down, giving the n-dimensional block shift."""
    if n < 1:
        raise ValueError("entropy target must be a positive integer")
    if n == 1:
        return make_bernoulli(field, 1)
    ext, emb = make_extension(field, least_irreducible(field, n))
    flow = res_flow(emb, make_bernoulli(ext, 1))
    return Flow(flow.shape, flow.endo, label=f"entropy-{n}")


# ---------------------------------------------------------------------------
# the change-of-fields theorem
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TheoremReport:
    """Outcome of checking the change-of-fields entropy formulas."""

    flow_label: str
    tower: tuple[dict, dict, dict]
    degree_fk: int
    ent_f: EntropyEstimate
    ent_k: EntropyEstimate
    ent_l: EntropyEstimate
    identities: dict[int, bool]
    verdict: str

    def to_dict(self) -> dict:
        def ent(v: EntropyEstimate):
            return {
                "value": v.value,
                "resolved": v.resolved,
                "lower_bound": [v.lower_bound.numerator, v.lower_bound.denominator],
            }

        return {
            "flow": self.flow_label,
            "tower": list(self.tower),
            "degree_FK": self.degree_fk,
            "ent_F": ent(self.ent_f),
            "ent_K": ent(self.ent_k),
            "ent_L": ent(self.ent_l),
            "identities": {str(n): bool(ok) for n, ok in sorted(self.identities.items())},
            "verdict": self.verdict,
        }


def _identity_checks(
    e_fk: FieldEmbedding,
    e_kl: FieldEmbedding,
    flow: Flow,
    flow_f: Flow,
    flow_l: Flow,
    n_max: int,
    ms: tuple[int, ...],
    slack: int,
) -> dict[int, bool]:
    """Per-depth identities: restriction scales codimensions by the degree
    and commutes with cotrajectories; induction preserves cotrajectories."""
    deg = e_fk.degree
    out = {n: True for n in range(1, n_max + 1)}
    for m in ms:
        u = GoodSubspace.principal(m)
        w_k = default_window(flow, u, n_max, slack)
        c_k = cotrajectory_run(flow, u, n_max, w_k)

        u_f = res_good(e_fk, u)
        c_f = cotrajectory_run(flow_f, u_f, n_max, deg * w_k)
        dead_f = deg * (flow.discrete_dim + m)
        dead_k = flow.discrete_dim + m

        c_l = cotrajectory_run(flow_l, u, n_max, w_k)
        for n in range(1, n_max + 1):
            codim_k = (flow.discrete_dim + w_k) - dead_k - c_k[n - 1].dim
            codim_f = deg * (flow.discrete_dim + w_k) - dead_f - c_f[n - 1].dim
            codim_l = (flow.discrete_dim + w_k) - dead_k - c_l[n - 1].dim
            ok = codim_f == deg * codim_k
            ok = ok and res_subspace(e_fk, c_k[n - 1]) == c_f[n - 1]
            ok = ok and ind_subspace(e_kl, c_k[n - 1]) == c_l[n - 1]
            ok = ok and codim_l == codim_k
            out[n] = out[n] and ok
    return out


def verify_theorem(
    e_fk: FieldEmbedding,
    e_kl: FieldEmbedding,
    flow: Flow,
    cfg: EngineConfig = DEFAULT_CONFIG,
    identity_n_max: int = 8,
    identity_ms: tuple[int, ...] = (0, 1, 2),
) -> TheoremReport:
    """Check the entropy change-of-fields formulas on one flow.

    Restriction multiplies entropy by [K:F]; induction preserves it.  The
    verdict is PASS only when every estimate resolves and both formulas and
    all per-depth identities hold; unresolved estimates give INCONCLUSIVE,
    never a false pass.
    """
    if flow.field != e_fk.target or flow.field != e_kl.source:
        raise FieldMismatch("flow field must be the middle of the tower")
    flow_f = res_flow(e_fk, flow)
    flow_l = ind_flow(e_kl, flow)
    ent_k = ent_star(flow, cfg)
    ent_f = ent_star(flow_f, cfg)
    ent_l = ent_star(flow_l, cfg)
    identities = _identity_checks(
        e_fk, e_kl, flow, flow_f, flow_l, identity_n_max, identity_ms, cfg.window_slack
    )

    identities_ok = all(identities.values())
    formulas_known = ent_k.resolved and ent_f.resolved and ent_l.resolved
    if not identities_ok:
        verdict = "FAIL"
    elif not formulas_known:
        verdict = "INCONCLUSIVE"
    elif ent_f.value == e_fk.degree * ent_k.value and ent_l.value == ent_k.value:
        verdict = "PASS"
    else:
        verdict = "FAIL"

    return TheoremReport(
        flow_label=flow.label,
        tower=(e_fk.source.descriptor, flow.field.descriptor, e_kl.target.descriptor),
        degree_fk=e_fk.degree,
        ent_f=ent_f,
        ent_k=ent_k,
        ent_l=ent_l,
        identities=identities,
        verdict=verdict,
    )
