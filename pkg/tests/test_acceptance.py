"""Acceptance criteria; each test records one pass/fail line, printed in the
terminal summary."""

import json
import math
import time
from contextlib import contextmanager

import pytest
from click.testing import CliRunner

import test_involutions
import test_plane
from bbrecog.adjoint import adjoint_for, so3k_check, so3k_mul
from bbrecog.blackbox import cyclic_sqrt
from bbrecog.cli import bench_rows, envelope, main
from bbrecog.frame import frame_relations, order_three_permuting
from bbrecog.involutions import find_involution_even_char
from bbrecog.kfield import residue_table
from bbrecog.matrix_oracle import CyclicBox, box_from_spec
from bbrecog.pipeline import build_field
from bbrecog.serendipity import find_characteristic_and_unipotent

from conftest import ACCEPTANCE, element_order, enumerate_group, order_histogram, psl2


@contextmanager
def criterion(n, title):
    rec = {"detail": ""}
    try:
        yield rec
    except pytest.skip.Exception:
        ACCEPTANCE[n] = ("SKIP", title, "long test; run with -m slow")
        raise
    except BaseException as exc:
        ACCEPTANCE[n] = ("FAIL", title, rec["detail"] or f"{type(exc).__name__}: {exc}")
        raise
    ACCEPTANCE[n] = ("PASS", title, rec["detail"])


def spec_of(q):
    for p in (2, 3, 5, 7):
        k = round(math.log(q, p))
        if k > 1 and p**k == q:
            return {"type": "PSL2", "field": {"p": p, "k": k}}
    return {"type": "PSL2", "field": {"p": q, "k": 1}}


def run_cli_unipotent(tmp_path, q, seed, hint=None):
    spec = spec_of(q)
    path = tmp_path / f"spec_{q}.json"
    path.write_text(json.dumps(spec))
    args = ["unipotent", "--spec", str(path), "--seed", str(seed)]
    if hint is not None:
        args += ["--p-hint", str(hint)]
    t0 = time.perf_counter()
    res = CliRunner().invoke(main, args, catch_exceptions=False)
    elapsed = time.perf_counter() - t0
    if res.exit_code != 0:
        return False, elapsed
    doc = json.loads(res.output)
    p = spec["field"]["p"]
    Y = box_from_spec(spec)
    u = Y.element_from_json(doc["u"])
    ok = (
        doc["verified"]
        and int(doc["p"]) == p
        and not Y.is_identity(u)
        and Y.is_identity(Y.power(u, p))
    )
    return ok, elapsed


# -- 1 -------------------------------------------------------------------------------

UNIPOTENT_QS = [5, 13, 17, 29, 101, 821, 25, 27, 49]
HINT_SWEEP = [13, 29, 101, 821, 10007, 1000003, 5463458053]


def _hint_additions(p):
    s = build_field({"type": "PGL2", "field": {"p": p, "k": 1}}, 1, 20)
    before = s.K.ops["add"]
    cert = find_characteristic_and_unipotent(s.X, s.K, p_hint=p)
    assert cert.verify(s.X)
    return s.K.ops["add"] - before


def test_criterion_1_unipotent_certificates(tmp_path):
    with criterion(1, "unipotent certificates, >= 19/20 seeds under 10 s; O(log p) additions") as rec:
        worst = []
        for q in UNIPOTENT_QS:
            good, slowest = 0, 0.0
            for seed in range(20):
                ok, elapsed = run_cli_unipotent(tmp_path, q, seed)
                good += ok and elapsed < 10
                slowest = max(slowest, elapsed)
            worst.append(f"q={q}: {good}/20 max {slowest:.1f}s")
            rec["detail"] = "; ".join(worst)
            assert good >= 19, q
        counts = {p: _hint_additions(p) for p in HINT_SWEEP}
        xs = [math.log2(p) for p in HINT_SWEEP]
        ys = [counts[p] for p in HINT_SWEEP]
        mx, my = sum(xs) / len(xs), sum(ys) / len(ys)
        slope = sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / sum((x - mx) ** 2 for x in xs)
        rec["detail"] += f"; additions {ys}, slope {slope:.2f} per bit"
        assert all(n <= 8 * math.log2(p) + 8 for p, n in counts.items())
        assert 0 < slope < 6


# -- 2 -------------------------------------------------------------------------------


@pytest.mark.slow
def test_criterion_2_ten_digit_prime(tmp_path):
    with criterion(2, "PSL2(5463458053) with --p-hint, verified in < 10 min") as rec:
        ok, elapsed = run_cli_unipotent(tmp_path, 5463458053, 1, hint=5463458053)
        rec["detail"] = f"verified={ok}, {elapsed:.1f}s"
        assert ok and elapsed < 600


@pytest.fixture(scope="session", autouse=True)
def _mark_long_test_skipped(request):
    yield
    if 2 not in ACCEPTANCE:
        ACCEPTANCE[2] = ("SKIP", "PSL2(5463458053) with --p-hint, verified in < 10 min",
                         "long test; run with -m slow")


# -- 3 -------------------------------------------------------------------------------


def _operation_tables(F, elems, p):
    """Residue tables of add/mul/neg/inv on a field model with eq and key."""
    index = {F.key(x): r for r, x in elems.items()}
    add = {(a, b): index.get(F.key(F.add(elems[a], elems[b]))) for a in elems for b in elems}
    mul = {(a, b): index.get(F.key(F.mul(elems[a], elems[b]))) for a in elems for b in elems}
    neg = {a: index.get(F.key(F.neg(elems[a]))) for a in elems}
    inv = {a: index.get(F.key(F.inv(elems[a]))) for a in elems if a}
    return add, mul, neg, inv


def _axioms_hold(add, mul, p):
    R = range(p)
    for a in R:
        if add[a, 0] != a or mul[a, 1] != a:
            return False
        if not any(add[a, b] == 0 for b in R):
            return False
        if a and not any(mul[a, b] == 1 for b in R):
            return False
        for b in R:
            if add[a, b] != add[b, a] or mul[a, b] != mul[b, a]:
                return False
            for c in R:
                if add[add[a, b], c] != add[a, add[b, c]]:
                    return False
                if mul[mul[a, b], c] != mul[a, mul[b, c]]:
                    return False
                if mul[a, add[b, c]] != add[mul[a, b], mul[a, c]]:
                    return False
    return True


class _AxisOps:
    """The axis field K with the robust constructions, as a plain function table."""

    def __init__(self, K):
        self.K = K

    def key(self, x):
        return self.K.key(x)

    def add(self, a, b):
        out = self.K.add_robust(a, b)
        return out.value if out.ok else None

    def mul(self, a, b):
        out = self.K.mul_robust(a, b)
        return out.value if out.ok else None

    def neg(self, a):
        return self.K.neg(a)

    def inv(self, a):
        return self.K.inv(a)


def _key_or_none(F, x):
    return None if x is None else F.key(x)


def test_criterion_3_field_reconstruction():
    with criterion(3, "K satisfies the field axioms, 100% table agreement with Z/p, p in {5,7,11,13}") as rec:
        notes, axis_complete = [], True
        for p in (5, 7, 11, 13):
            s = build_field({"type": "PSL2", "field": {"p": p, "k": 1}}, 1, 20)
            # axis field: every residue reachable, and every defined entry agrees
            table = residue_table(s.K, p)
            ops = _AxisOps(s.K)
            index = {s.K.key(x): r for r, x in table.items()}
            agree = total = 0
            for a in table:
                for b in table:
                    for op, want in ((ops.add, (a + b) % p), (ops.mul, (a * b) % p)):
                        if want not in table:
                            continue
                        total += 1
                        agree += index.get(_key_or_none(s.K, op(table[a], table[b]))) == want
            missing = sorted(set(range(p)) - set(table))
            axis_complete &= not missing and agree == total
            # the same field on an anisotropic line, where every residue has a point
            F = adjoint_for(s.K, p).F
            elems = {r: F.residue(r) for r in range(p)}
            add, mul, neg, inv = _operation_tables(F, elems, p)
            line_ok = (
                len({F.key(x) for x in elems.values()}) == p
                and all(add[a, b] == (a + b) % p and mul[a, b] == (a * b) % p for a in range(p) for b in range(p))
                and all(neg[a] == (-a) % p for a in range(p))
                and all(inv[a] == pow(a, -1, p) for a in range(1, p))
                and _axioms_hold(add, mul, p)
            )
            notes.append(f"p={p}: axis {p - len(missing)}/{p} residues, {agree}/{total} entries"
                         + (f", missing {missing}" if missing else "") + f"; anisotropic line {'ok' if line_ok else 'BAD'}")
            assert line_ok, p
        rec["detail"] = "; ".join(notes)
        assert axis_complete, "the axis carries no point for +-sqrt(-1) when p = 1 mod 4"


# -- 4 -------------------------------------------------------------------------------


def test_criterion_4_tonelli_shanks():
    with criterion(4, "Tonelli-Shanks on cyclic boxes of order 2^a b, a <= 8, odd b <= 63") as rec:
        bad = checked = 0
        for a in range(9):
            for b in range(1, 64, 2):
                N = 2**a * b
                box = CyclicBox(N)
                squares = {(2 * x) % N for x in range(N)}
                for z in range(N):
                    r = cyclic_sqrt(box, 1, z)
                    checked += 1
                    if z in squares:
                        bad += r is None or (2 * r) % N != z
                    else:
                        bad += r is not None
        rec["detail"] = f"{checked} elements over 288 boxes, {bad} wrong"
        assert bad == 0


# -- 5 -------------------------------------------------------------------------------


def test_criterion_5_adjoint_morphisms():
    with criterion(5, "rho injective homomorphism at q=5; hom and round trip at q=13, 25") as rec:
        s = build_field(spec_of(5), 1, 20)
        A = adjoint_for(s.K, 5)
        X = s.X
        elements = enumerate_group(X, 120)
        images = [A.rho(x) for x in elements]
        distinct = len({m.keys() for m in images})
        in_so3 = all(so3k_check(m) for m in images)
        hom_bad = 0
        for x, mx in zip(elements, images):
            for y, my in zip(elements, images):
                hom_bad += not so3k_mul(mx, my).eq(A.rho(X.mul(x, y)))
        notes = [f"q=5: {distinct}/120 distinct, {hom_bad}/14400 hom failures"]
        assert distinct == 120 and in_so3 and hom_bad == 0
        for q in (13, 25):
            s = build_field(spec_of(q), 1, 20)
            A = adjoint_for(s.K, q)
            X = s.X
            hom = sum(
                not so3k_mul(A.rho(x), A.rho(y)).eq(A.rho(X.mul(x, y)))
                for x, y in ((X.random(), X.random()) for _ in range(100))
            )
            back = sum(not X.eq(A.rho_inverse(A.rho(x)), x) for x in (X.random() for _ in range(100)))
            notes.append(f"q={q}: {hom}/100 hom, {back}/100 round-trip failures")
            rec["detail"] = "; ".join(notes)
            assert hom == 0 and back == 0


# -- 6 -------------------------------------------------------------------------------


def _full_closure(box, gens, limit=200):
    seen = {box.key(box.identity): box.identity}
    frontier = [box.identity]
    while frontier and len(seen) <= limit:
        x = frontier.pop()
        for g in gens:
            y = box.mul(x, g)
            if box.key(y) not in seen:
                seen[box.key(y)] = y
                frontier.append(y)
    return list(seen.values())


def test_criterion_6_sym4():
    with criterion(6, "Sym4 with 24 elements, histogram 1:1 2:9 3:8 4:6, relations, 10/10 at q=7, 13") as rec:
        want = {1: 1, 2: 9, 3: 8, 4: 6}
        good = {}
        for q in (7, 13):
            good[q] = 0
            for seed in range(10):
                s = build_field(spec_of(q), seed, 20)
                f, X = s.frame, s.X
                H = _full_closure(X, [f.theta, f.d1, f.s4, f.e1, f.e2, f.e3, f.d2, f.d3])
                good[q] += len(H) == 24 and order_histogram(X, H) == want and frame_relations(X, f)
        rec["detail"] = ", ".join(f"q={q}: {n}/10" for q, n in good.items())
        assert all(n == 10 for n in good.values())


# -- 7 -------------------------------------------------------------------------------


def test_criterion_7_order_three_probability():
    with criterion(7, "odd-order frequency of h1, h2 at q=101 over 2000 trials >= 1/2 - 1/202 - 3 sigma") as rec:
        q, trials = 101, 2000
        s = build_field({"type": "PGL2", "field": {"p": q, "k": 1}}, 5, 20)
        f, X = s.frame, s.X
        hits = sum(order_three_permuting(X, f.e1, f.e2, f.e3, X.random()) is not None for _ in range(trials))
        bound = 0.5 - 1 / (2 * q) - 3 * math.sqrt(0.25 / trials)
        rec["detail"] = f"frequency {hits / trials:.4f}, bound {bound:.4f}"
        assert hits / trials >= bound


# -- 8 -------------------------------------------------------------------------------


def test_criterion_8_geometry(pgl2_small):
    with criterion(8, "line sizes, collinearity, polarity, incidence at q=5, 7; harmonic -1 at q=13") as rec:
        checks = [
            test_plane.test_polar_line_cardinalities,
            test_plane.test_parabolic_lines_carry_q_points,
            test_plane.test_collinearity_is_coplanarity,
            test_plane.test_polarity_is_an_involution,
            test_plane.test_incidence_axioms,
            test_plane.test_two_lines_meet_once,
        ]
        for q in (5, 7):
            for check in checks:
                rec["detail"] = f"{check.__name__} at q={q}"
                check(pgl2_small, q)
        rec["detail"] = "harmonic conjugate at q=13"
        test_plane.test_harmonic_conjugate_cross_ratio()
        rec["detail"] = f"{len(checks)} exhaustive checks at q=5, 7; cross-ratio -1 at q=13"


# -- 9 -------------------------------------------------------------------------------


def test_criterion_9_even_characteristic():
    with criterion(9, "find_involution_even_char 20/20 on PSL2(2^n), n=2..5, inside a Sylow 2-subgroup") as rec:
        good = {}
        for n in (2, 3, 4, 5):
            q = 2**n
            good[q] = 0
            for seed in range(20):
                box = psl2(q, seed=seed)
                x = find_involution_even_char(box)
                good[q] += box.is_involution(x) and test_involutions._in_sylow(box, x)
        rec["detail"] = ", ".join(f"q={q}: {k}/20" for q, k in good.items())
        assert all(k == 20 for k in good.values())


# -- 10 ------------------------------------------------------------------------------

BENCH_QS = [13, 101, 1009, 10007]


def test_criterion_10_complexity_shape():
    with criterion(10, "add/mul/reify ops within 2x of c logE loglogE; neg/inv constant") as rec:
        rows = bench_rows(BENCH_QS, reps=10, seed=0, confidence=20,
                          procedures=("add", "mul", "reify", "neg", "inv"))
        by = {}
        for proc, q, log2E, reps, ops, secs in rows:
            by.setdefault(proc, []).append((q, log2E, ops))
        notes = []
        for proc in ("add", "mul", "reify"):
            series = by[proc]
            _, l0, ops0 = series[0]
            c = ops0 / envelope(l0)
            ratios = [ops / (c * envelope(l)) for _, l, ops in series]
            notes.append(f"{proc} max ratio {max(ratios):.2f}")
            assert max(ratios) <= 2.0, proc
        for proc in ("neg", "inv"):
            counts = {ops for _, _, ops in by[proc]}
            notes.append(f"{proc} ops {sorted(counts)}")
            assert counts == {3.0}, proc
        rec["detail"] = "; ".join(notes)
