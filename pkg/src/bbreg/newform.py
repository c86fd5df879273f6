"""Newform coefficient data: the built-in Delta engine, JSON I/O, sieves.

Integers in every JSON document are written as decimal strings so that
large Fourier coefficients survive any JSON reader unchanged.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
import urllib.error
import urllib.parse
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from .coeffring import CoeffRing, RingElem, invert
from .errors import MissingCoefficients, NetworkError, NonInvertibleDenominator, NonUnit, SchemaError, SizeCapExceeded
from .groups import kronecker

SCHEMA = "bbreg/1"
DELTA_BOUND_CAP = 10**6
DEFAULT_LMFDB_URL = "https://www.lmfdb.org/api"


@dataclass(frozen=True, eq=False)
class NewformData:
    """Fourier coefficients a_1, ..., a_bound of a newform with rational coefficients.

    Attributes:
        label: identifier such as ``"11.2.a.a"``.
        N: level.
        k: even weight.
        sign: the sign epsilon of the functional equation.
        an: n -> a_n for 1 <= n <= bound.
        note: free-form provenance text.
    """

    label: str
    N: int
    k: int
    sign: int
    an: Mapping[int, int] = field(repr=False)
    note: str = ""

    @property
    def bound(self) -> int:
        return len(self.an)

    def __getitem__(self, n: int) -> int:
        try:
            return self.an[n]
        except KeyError:
            raise MissingCoefficients(f"a_{n} is not available (bound {self.bound})") from None

    def validate(self, spot_checks: bool = True) -> None:
        """Check normalisation, coverage and multiplicativity.

        Raises:
            SchemaError: on a_1 != 1, a bad sign or weight, or a failed
                multiplicativity spot check.
            MissingCoefficients: if 1..bound is not covered contiguously.
        """
        if self.sign not in (1, -1):
            raise SchemaError("sign must be +1 or -1")
        if self.k < 2 or self.k % 2:
            raise SchemaError("weight must be even and at least 2")
        if self.N < 1:
            raise SchemaError("level must be positive")
        if not self.an:
            raise MissingCoefficients("no coefficients")
        top = max(self.an)
        gaps = [n for n in range(1, top + 1) if n not in self.an]
        if gaps:
            raise MissingCoefficients(f"coefficients missing for n = {gaps[:5]}")
        if self.an[1] != 1:
            raise SchemaError("a_1 must equal 1")
        if spot_checks:
            root = math.isqrt(top)
            for m in range(2, root + 1):
                for n in range(m + 1, root + 1):
                    if math.gcd(m, n) == 1 and self.an[m * n] != self.an[m] * self.an[n]:
                        raise SchemaError(f"a_{m * n} != a_{m} a_{n}")

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA,
            "kind": "newform",
            "label": self.label,
            "level": self.N,
            "weight": self.k,
            "sign": self.sign,
            "field": {"degree": 1, "poly": [0, 1]},
            "note": self.note,
            "an": {str(n): str(self.an[n]) for n in sorted(self.an)},
        }

    @classmethod
    def from_json(cls, obj: dict) -> "NewformData":
        try:
            if obj.get("schema", SCHEMA) != SCHEMA:
                raise SchemaError(f"unsupported schema {obj.get('schema')!r}")
            fld = obj.get("field", {"degree": 1})
            if int(fld.get("degree", 1)) != 1:
                raise SchemaError("only rational coefficient fields are supported")
            an = {int(n): int(v) for n, v in obj["an"].items()}
            f = cls(str(obj["label"]), int(obj["level"]), int(obj["weight"]), int(obj["sign"]), an, str(obj.get("note", "")))
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise SchemaError(f"malformed newform document: {exc}") from exc
        f.validate()
        return f


# ---------------------------------------------------------------------------
# exact power series


def _pack(coeffs: list[int], width: int) -> int:
    """Evaluate sum c_i 2^(width i) for signed c_i with |c_i| < 2^(width - 1)."""
    nbytes = width // 8
    half = 1 << (width - 1)
    raw = b"".join((c + half).to_bytes(nbytes, "little") for c in coeffs)
    offset = int.from_bytes(half.to_bytes(nbytes, "little") * len(coeffs), "little")
    return int.from_bytes(raw, "little") - offset


def _unpack(x: int, count: int, width: int) -> list[int]:
    nbytes = width // 8
    half = 1 << (width - 1)
    offset = int.from_bytes(half.to_bytes(nbytes, "little") * count, "little")
    # higher digits only disturb bits above width * count, which are discarded
    raw = ((x + offset) & ((1 << (width * count)) - 1)).to_bytes(nbytes * count, "little")
    return [int.from_bytes(raw[i * nbytes : (i + 1) * nbytes], "little") - half for i in range(count)]


def series_mul(a: list[int], b: list[int], n: int) -> list[int]:
    """First n coefficients of a * b, via Kronecker substitution."""
    a, b = a[:n], b[:n]
    bound = max(map(abs, a), default=0) * max(map(abs, b), default=0) * min(len(a), len(b))
    width = max(8, -(-(bound.bit_length() + 2) // 8) * 8)
    prod = _pack(a, width) * _pack(b, width)
    return _unpack(prod, n, width)


def euler_cube(n: int) -> list[int]:
    """prod (1 - q^k)^3 to n terms: sum_j (-1)^j (2j + 1) q^(j(j+1)/2)."""
    out = [0] * n
    j = 0
    while j * (j + 1) // 2 < n:
        out[j * (j + 1) // 2] = (-1) ** j * (2 * j + 1)
        j += 1
    return out


def delta_coefficients(bound: int) -> NewformData:
    """Ramanujan tau(n) for 1 <= n <= bound from Delta = q prod (1 - q^n)^24.

    Raises:
        SizeCapExceeded: if bound exceeds 10^6.
    """
    if bound < 1:
        raise ValueError("bound must be positive")
    if bound > DELTA_BOUND_CAP:
        raise SizeCapExceeded(f"bound {bound} exceeds {DELTA_BOUND_CAP}")
    e = euler_cube(bound)
    e2 = series_mul(e, e, bound)
    e4 = series_mul(e2, e2, bound)
    e8 = series_mul(e4, e4, bound)
    an = {n + 1: e8[n] for n in range(bound)}
    return NewformData("1.12.a.a", 1, 12, 1, an, "Delta; level 1 and weight 12, used as a coefficient source")


# ---------------------------------------------------------------------------
# persistence


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=path.suffix)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps(obj: dict) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def save_newform(f: NewformData, path: str | os.PathLike) -> None:
    _atomic_write(Path(path), dumps(f.to_json()))


def load_newform(path: str | os.PathLike) -> NewformData:
    """Read and validate a newform document.

    Raises:
        SchemaError: malformed JSON or failed invariant.
        MissingCoefficients: gaps in the coefficient range.
    """
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(obj, dict):
        raise SchemaError(f"{path}: expected a JSON object")
    return NewformData.from_json(obj)


def _cache_path(cache_dir: str | os.PathLike, label: str) -> Path:
    safe = "".join(c if c.isalnum() or c in ".-_" else "_" for c in label)
    return Path(cache_dir) / f"newform-{safe}.json"


def lmfdb_to_newform(record: dict) -> NewformData:
    """Map an mf_newforms record (rational coefficients) into NewformData.

    The sign is (-1)^(k/2) times the Fricke eigenvalue.
    """
    try:
        if int(record.get("dim", 1)) != 1:
            raise SchemaError("only rational newforms (dimension 1) are supported")
        k = int(record["weight"])
        traces = record["traces"]
        fricke = int(record.get("fricke_eigenval", 1))
        an = {n + 1: int(v) for n, v in enumerate(traces)}
        return NewformData(str(record["label"]), int(record["level"]), k, (-1) ** (k // 2) * fricke, an, "fetched")
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"unexpected record layout: {exc}") from exc


def fetch_newform(base_url: str, label: str, cache_dir: str | os.PathLike, timeout: float = 30.0) -> NewformData:
    """Load a newform from the cache, fetching and caching it when absent.

    Raises:
        NetworkError: on any transport failure.
        SchemaError: if the response cannot be mapped.
    """
    path = _cache_path(cache_dir, label)
    if path.exists():
        return load_newform(path)
    query = urllib.parse.urlencode({"label": label, "_format": "json"})
    url = f"{base_url.rstrip('/')}/mf_newforms/?{query}"
    try:
        with urllib.request.urlopen(url, timeout=timeout) as resp:
            body = json.loads(resp.read().decode("utf-8"))
    except (urllib.error.URLError, OSError, TimeoutError) as exc:
        raise NetworkError(f"fetching {url} failed: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{url}: response is not JSON") from exc
    data = body.get("data") if isinstance(body, dict) else None
    if not data:
        raise SchemaError(f"no newform with label {label!r}")
    f = lmfdb_to_newform(data[0])
    f.validate()
    save_newform(f, path)
    return load_newform(path)


# ---------------------------------------------------------------------------
# units and sieves


def unit_u(f: NewformData, ell: int, ring: CoeffRing) -> RingElem:
    """a_l / l^(k/2 - 1) in R.

    Raises:
        NonInvertibleDenominator: if l = p (and k > 2).
    """
    denom = ring(pow(ell, f.k // 2 - 1, ring.q))
    try:
        inv = invert(denom)
    except NonUnit as exc:
        raise NonInvertibleDenominator(f"{ell}^{f.k // 2 - 1} is not a unit in {ring}") from exc
    return ring(f[ell]) * inv


def primes_up_to(bound: int) -> np.ndarray:
    """Primes <= bound by the sieve of Eratosthenes."""
    if bound < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(bound + 1, dtype=bool)
    flags[:2] = False
    for i in range(2, math.isqrt(bound) + 1):
        if flags[i]:
            flags[i * i :: i] = False
    return np.nonzero(flags)[0].astype(np.int64)


def sieve_S(D: int, N: int, p: int, m: int, bound: int) -> list[int]:
    """Primes l <= bound inert in Q(sqrt(D)) with l not dividing N and p^m | l + 1."""
    if p % 2 == 0:
        raise ValueError("p must be odd")
    q = p**m
    cands = primes_up_to(bound)
    cands = cands[(cands + 1) % q == 0]
    return [int(ell) for ell in cands if N % int(ell) != 0 and kronecker(D, int(ell)) == -1]


def sieve_kolyvagin(f: NewformData, D: int, p: int, m: int, bound: int) -> list[int]:
    """Primes of sieve_S that also have p^m | a_l and l not dividing D."""
    q = p**m
    out = [ell for ell in sieve_S(D, f.N, p, m, bound) if D % ell != 0]
    if out and out[-1] > f.bound:
        raise MissingCoefficients(f"need a_l up to {out[-1]}, have {f.bound}")
    return [ell for ell in out if f[ell] % q == 0]


def euler_phi(n: int) -> int:
    result, m, d = n, n, 2
    while d * d <= m:
        if m % d == 0:
            while m % d == 0:
                m //= d
            result -= result // d
        d += 1
    if m > 1:
        result -= result // m
    return result


def exceptional_check(p: int, N: int, D: int, k: int, field_disc: int = 1) -> dict:
    """Numeric exceptional-prime conditions for (p, N, D, k).

    Both readings of the combined condition are reported: the conjunction
    (p | 6 N D (k-2)! phi(N) and p ramified in F) and the union.  The
    large-image condition is not evaluated.
    """
    fact = math.factorial(k - 2)
    phi = euler_phi(N)
    divides = (6 * N * abs(D) * fact * phi) % p == 0
    ramified = field_disc % p == 0
    intro_bad = (2 * N * fact * phi) % p == 0
    return {
        "p": p,
        "p_odd": p % 2 == 1,
        "divides_6ND_fact_phi": divides,
        "ramifies_in_F": ramified,
        "exceptional_conjunction": divides and ramified,
        "exceptional_union": divides or ramified,
        "divides_2N_fact_phi": intro_bad,
        "big_image": "not checked (out of scope)",
        "flagged": p % 2 == 0 or divides,
    }
