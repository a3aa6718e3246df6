"""Command-line driver.

Exit codes: 0 success, 1 usage or validation error, 2 Monte-Carlo budget
exhausted.  Every flag can also be set through an environment variable
named BBRECOG_<COMMAND>_<FLAG>, e.g. BBRECOG_UNIPOTENT_SEED=7.
"""

from __future__ import annotations

import csv
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Optional

import click

from .errors import BudgetExhausted, ValidationError
from .matrix_oracle import box_from_spec, load_spec

EXIT_OK, EXIT_INVALID, EXIT_BUDGET = 0, 1, 2
FRAME_FORMAT = "bbrecog-frame/1"
CERT_FORMAT = "bbrecog-unipotent/1"
BENCH_HEADER = ("procedure", "q", "log2E", "reps", "mean_ops", "mean_seconds")
BENCH_PROCEDURES = ("involution", "centralizer", "reify", "join", "meet", "add", "mul", "neg", "inv", "rho")
TABLE_SIZE = 16
RESIDUE_DISPLAY_LIMIT = 2000


class _Fail(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _run(fn):
    """Map library errors onto exit codes."""
    try:
        fn()
    except _Fail as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(exc.code)
    except ValidationError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INVALID)
    except BudgetExhausted as exc:
        click.echo(f"budget exhausted: {exc}", err=True)
        sys.exit(EXIT_BUDGET)
    sys.exit(EXIT_OK)


def _spec_from(path: str) -> dict:
    spec = load_spec(path)
    box_from_spec(spec)  # validates
    return spec


@click.group(context_settings={"auto_envvar_prefix": "BBRECOG"})
def main():
    """Constructive recognition of black-box PSL2 / PGL2 in odd characteristic."""


_common = [
    click.option("--spec", "spec_path", required=True, type=click.Path(dir_okay=False), help="group spec JSON"),
    click.option("--seed", default=0, type=click.IntRange(0, 2**64 - 1), show_default=True),
    click.option("--confidence", default=20, type=click.IntRange(1, 200), show_default=True,
                 help="failure probability target 2^-k"),
    click.option("--out", default=None, type=click.Path(dir_okay=False), help="output file (default stdout)"),
]


def common(fn):
    for opt in reversed(_common):
        fn = opt(fn)
    return fn


# -- unipotent --------------------------------------------------------------------


def _unipotent_job(args):
    spec, seed, confidence, p_hint = args
    from .pipeline import run_unipotent

    try:
        cert, u, setup = run_unipotent(spec, seed, confidence, p_hint)
    except BudgetExhausted as exc:
        return None, str(exc)
    return {
        "p": str(cert.p),
        "route": cert.route,
        "steps": cert.steps,
        "u": setup.Y.element_to_json(u),
    }, None


@main.command("unipotent")
@common
@click.option("--p-hint", default=None, type=int, help="the characteristic, if known")
@click.option("--jobs", default=1, type=click.IntRange(1, 256), show_default=True,
              help="independent seeded searches run in parallel")
def cmd_unipotent(spec_path, seed, confidence, out, p_hint, jobs):
    """Find an element of prime order p and write its certificate."""

    def body():
        spec = _spec_from(spec_path)
        if int(spec["field"]["p"]) == 2:
            raise ValidationError("odd characteristic required")
        seeds = [seed + i for i in range(jobs)]
        tasks = [(spec, s, confidence, p_hint) for s in seeds]
        if jobs == 1:
            results = [_unipotent_job(tasks[0])]
        else:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(_unipotent_job, tasks))
        # the lowest seed that succeeded wins, so output does not depend on timing
        for s, (payload, _) in zip(seeds, results):
            if payload is not None:
                payload.update(format=CERT_FORMAT, group=box_from_spec(spec).spec(), seed=s, verified=True)
                _emit(_dumps(payload), out)
                return
        raise BudgetExhausted(results[-1][1] or "no certificate")

    _run(body)


# -- coordinatize ---------------------------------------------------------------


def _frame_document(spec: dict, seed: int, confidence: int, setup) -> dict:
    return {
        "format": FRAME_FORMAT,
        "group": spec,
        "seed": seed,
        "confidence": confidence,
        "frame": setup.frame.to_json(setup.X),
    }


def _residue_table(K, size: int):
    """Residues 0..size-1 in K plus their sum and product tables; None marks
    an entry whose construction met the quadric."""
    images = []
    for r in range(size):
        img = K.residue_image(r)
        images.append(img.value if img.ok else None)

    def lookup(v):
        if v is None:
            return None
        for r, w in enumerate(images):
            if w is not None and K.eq(v, w):
                return r
        return None

    add, mul = [], []
    for a in range(size):
        add.append([])
        mul.append([])
        for b in range(size):
            x, y = images[a], images[b]
            if x is None or y is None:
                add[a].append(None)
                mul[a].append(None)
                continue
            s, m = K.add_robust(x, y), K.mul_robust(x, y)
            add[a].append(lookup(s.value) if s.ok else None)
            mul[a].append(lookup(m.value) if m.ok else None)
    return add, mul


def _format_table(name: str, table, p: int) -> str:
    lines = [f"{name} (mod {p})"]
    for row in table:
        lines.append(" ".join(f"{v:>3}" if v is not None else "  *" for v in row))
    return "\n".join(lines) + "\n"


@main.command("coordinatize")
@common
def cmd_coordinatize(spec_path, seed, confidence, out):
    """Build the Sym4 frame and the field K; print residue tables."""

    def body():
        from .pipeline import build_field

        spec = _spec_from(spec_path)
        setup = build_field(spec, seed, confidence)
        doc = _frame_document(spec, seed, confidence, setup)
        if out:
            _emit(_dumps(doc), out)
        p = int(spec["field"]["p"])
        size = min(p, TABLE_SIZE)
        add, mul = _residue_table(setup.K, size)
        click.echo(_format_table("addition", add, p) + _format_table("multiplication", mul, p), nl=False)
        if not out:
            click.echo(_dumps(doc), nl=False)

    _run(body)


# -- rho ---------------------------------------------------------------------------


def _load_frame_setup(path: str):
    """Rebuild the coordinatization recorded in a frame file and check that it
    reproduces the stored frame."""
    from .frame import SpinorFrame
    from .pipeline import build_field

    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read frame {path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != FRAME_FORMAT:
        raise ValidationError("not a frame file")
    setup = build_field(doc["group"], int(doc["seed"]), int(doc.get("confidence", 20)))
    stored = SpinorFrame.from_json(setup.X, doc["frame"])
    for name in ("e1", "e2", "e3", "d1", "d2", "d3"):
        if not setup.X.eq(getattr(stored, name), getattr(setup.frame, name)):
            raise ValidationError("frame file does not match its recorded seed")
    return setup


class _Display:
    """Readable matrix entries: residues for small prime fields, otherwise
    the involution string that encodes the element."""

    def __init__(self, F, setup):
        self.F = F
        self.X = setup.X
        q = getattr(setup.Y, "q", None)
        field = getattr(setup.Y, "field", None)
        self.table = None
        if field is not None and field.k == 1 and q <= RESIDUE_DISPLAY_LIMIT:
            self.table = {F.key(F.residue(r)): r for r in range(q)}
            self.q = q

    def encode(self, v):
        if self.table is not None:
            r = self.table.get(self.F.key(v))
            if r is not None:
                return r if r <= self.q // 2 else r - self.q
        return {"point": self.X.element_to_json(v)}

    def decode(self, v):
        if isinstance(v, int):
            return self.F.residue(v)
        if isinstance(v, dict) and "point" in v:
            return self.X.element_from_json(v["point"])
        raise ValidationError(f"cannot read matrix entry {v!r}")


def _named_element(setup, name: str):
    f, X = setup.frame, setup.X
    if name in ("e1", "e2", "e3", "d1", "d2", "d3", "theta", "s4"):
        return getattr(f, name)
    if name == "identity":
        return X.identity
    if name == "random":
        return X.random()
    try:
        data = json.loads(name)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"unknown element {name!r}") from exc
    Y = setup.Y
    if setup.X is not Y:
        raise ValidationError("element strings of a lifted group are given as a frame element name")
    return Y.element_from_json(data)


@main.command("rho")
@click.option("--frame", "frame_path", required=True, type=click.Path(dir_okay=False),
              help="frame file written by coordinatize --out")
@click.option("--element", default=None, help="e1..d3, theta, s4, identity, random, or an element JSON")
@click.option("--matrix", default=None, help="3x3 JSON matrix of integers or encoded entries")
@click.option("--round-trip", is_flag=True, help="check rho^-1(rho(x)) = x (or rho(rho^-1(m)) = m)")
@click.option("--out", default=None, type=click.Path(dir_okay=False))
def cmd_rho(frame_path, element, matrix, round_trip, out):
    """Apply rho to an element of X or rho^-1 to a matrix over K."""

    def body():
        from .adjoint import Matrix3K, adjoint_for

        if (element is None) == (matrix is None):
            raise ValidationError("give exactly one of --element and --matrix")
        setup = _load_frame_setup(frame_path)
        rep = adjoint_for(setup.K, getattr(setup.Y, "q", None))
        disp = _Display(rep.F, setup)
        lines = []
        if element is not None:
            x = _named_element(setup, element)
            m = rep.rho(x)
            doc = {"rho": m.to_json(disp.encode)}
            if round_trip:
                back = rep.rho_inverse(m)
                if not setup.X.eq(back, x):
                    raise _Fail(EXIT_INVALID, "round trip FAILED")
                lines.append("OK")
        else:
            try:
                rows = json.loads(matrix)
                entries = tuple(disp.decode(v) for row in rows for v in row)
                if len(rows) != 3 or any(len(r) != 3 for r in rows):
                    raise ValueError
            except (json.JSONDecodeError, TypeError, ValueError) as exc:
                raise ValidationError("matrix must be a 3x3 JSON array") from exc
            m = Matrix3K(entries, rep.F)
            x = rep.rho_inverse(m)
            doc = {"rho_inverse": setup.X.element_to_json(x)}
            if round_trip:
                if not rep.rho(x).eq(m):
                    raise _Fail(EXIT_INVALID, "round trip FAILED")
                lines.append("OK")
        _emit(_dumps(doc), out)
        for line in lines:
            click.echo(line)

    _run(body)


# -- bench ------------------------------------------------------------------------


def bench_rows(qs, reps: int, seed: int, confidence: int, procedures=BENCH_PROCEDURES):
    """(procedure, q, log2E, reps, mean_ops, mean_seconds) per procedure and q,
    measured on PGL2(q) so that no lift is involved."""
    from . import plane
    from .adjoint import adjoint_for
    from .fields import ExplicitField
    from .frame import build_sym4
    from .involutions import centralizer_of_involution, conjugation_proto, engine_for, find_involution, reify
    from .kfield import BlackBoxFieldK
    from .matrix_oracle import make_pgl2_box

    rows = []
    for q in qs:
        X = make_pgl2_box(ExplicitField(q), seed=seed)
        engine_for(X, confidence)
        frame = build_sym4(X)
        K = BlackBoxFieldK(X, frame, order=q)
        rep = adjoint_for(K, q) if "rho" in procedures else None

        def k_elements():
            while True:
                a = K.random_element()
                if a is not None:
                    return a

        def involution_pair():
            s = find_involution(X)
            while True:
                t = find_involution(X)
                if not X.eq(s, t):
                    return s, t

        setups = {
            "involution": lambda: (),
            "centralizer": lambda: (find_involution(X),),
            "reify": lambda: (find_involution(X),),
            "join": involution_pair,
            "meet": lambda: (plane.join(X, *involution_pair()), plane.join(X, *involution_pair())),
            "add": lambda: (k_elements(), k_elements()),
            "mul": lambda: (k_elements(), k_elements()),
            "neg": lambda: (k_elements(),),
            "inv": lambda: (k_elements(),),
            "rho": lambda: (X.random(),),
        }
        actions = {
            "involution": lambda: find_involution(X),
            "centralizer": lambda t: centralizer_of_involution(X, t).sample(),
            "reify": lambda t: reify(X, conjugation_proto(X, t)),
            "join": lambda s, t: plane.join(X, s, t),
            "meet": lambda k, l: plane.meet(X, k, l),
            "add": lambda a, b: K.add(a, b),
            "mul": lambda a, b: K.mul(a, b),
            "neg": lambda a: K.neg(a),
            "inv": lambda a: K.inv(a),
            "rho": lambda x: rep.rho(x),
        }
        log2E = X.exponent.E.bit_length()
        for proc in procedures:
            ops = secs = 0.0
            for _ in range(reps):
                args = setups[proc]()
                before = X.ops_total()
                t0 = time.perf_counter()
                actions[proc](*args)
                secs += time.perf_counter() - t0
                ops += X.ops_total() - before
            rows.append((proc, q, log2E, reps, ops / reps, secs / reps))
    return rows


def envelope(log2E: int) -> float:
    """log E * log log E, the shape the field operations should follow."""
    return log2E * math.log2(log2E)


@main.command("bench")
@click.option("--spec", "spec_path", default=None, type=click.Path(dir_okay=False),
              help="take q from this spec instead of the sweep")
@click.option("--q", "qs", multiple=True, type=int, help="prime field orders (repeatable)")
@click.option("--reps", default=5, type=click.IntRange(1, 10_000), show_default=True)
@click.option("--seed", default=0, type=click.IntRange(0, 2**64 - 1), show_default=True)
@click.option("--confidence", default=20, type=click.IntRange(1, 200), show_default=True)
@click.option("--procedure", "procs", multiple=True, type=click.Choice(BENCH_PROCEDURES))
@click.option("--out", default=None, type=click.Path(dir_okay=False))
def cmd_bench(spec_path, qs, reps, seed, confidence, procs, out):
    """CSV of group-operation counts and wall time per procedure."""

    def body():
        sweep = list(qs) or [13, 101, 1009, 10007]
        if spec_path:
            spec = _spec_from(spec_path)
            if int(spec["field"].get("k", 1)) != 1:
                raise ValidationError("bench runs over prime fields")
            sweep = [int(spec["field"]["p"])]
        for q in sweep:
            from sympy import isprime

            if q == 2 or not isprime(q):
                raise ValidationError(f"bench needs odd primes, got {q}")
        rows = bench_rows(sweep, reps, seed, confidence, tuple(procs) or BENCH_PROCEDURES)
        import io

        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(BENCH_HEADER)
        for proc, q, log2E, n, ops, secs in rows:
            w.writerow((proc, q, log2E, n, f"{ops:.1f}", f"{secs:.6f}"))
        _emit(buf.getvalue(), out)

    _run(body)


if __name__ == "__main__":  # pragma: no cover
    main()
