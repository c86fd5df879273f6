import json
import math
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

import oracles
from bbreg import newform as nf
from bbreg.coeffring import CoeffRing
from bbreg.errors import MissingCoefficients, NetworkError, NonInvertibleDenominator, SchemaError, SizeCapExceeded

# first twenty coefficients of the weight-2 newform of level 11
LEVEL11 = [1, -2, -1, 2, 1, 2, -2, 0, -2, -2, 1, -2, 4, 4, -1, -4, -2, 4, 0, 2]


@pytest.fixture(scope="module")
def delta():
    return nf.delta_coefficients(5000)


@pytest.fixture(scope="module")
def tau():
    return oracles.tau_oracle(2000)


def test_tau_small_values(delta):
    assert [delta[n] for n in range(1, 11)] == [1, -24, 252, -1472, 4830, -6048, -16744, 84480, -113643, -115920]
    assert delta.N == 1 and delta.k == 12 and delta.sign == 1


def test_tau_matches_divisor_recursion(delta, tau):
    assert all(delta[n] == tau[n] for n in range(1, 2001))


def test_tau_multiplicative_and_hecke(delta):
    delta.validate()
    for m in range(2, 71):
        for n in range(m + 1, 5000 // m + 1):
            if math.gcd(m, n) == 1:
                assert delta[m * n] == delta[m] * delta[n]
    for p in oracles.primes_upto(70):
        pk = p
        while pk * p * p <= 5000:
            # tau(p^(k+1)) = tau(p) tau(p^k) - p^11 tau(p^(k-1))
            prev = delta[pk // p] if pk > p else 1
            assert delta[pk * p] == delta[p] * delta[pk] - p**11 * prev
            pk *= p


def test_ramanujan_congruence(delta):
    # tau(n) = sigma_11(n) mod 691
    for n in range(1, 300):
        assert (delta[n] - sum(d**11 for d in range(1, n + 1) if n % d == 0)) % 691 == 0


def test_delta_bounds():
    with pytest.raises(SizeCapExceeded):
        nf.delta_coefficients(10**6 + 1)
    with pytest.raises(ValueError):
        nf.delta_coefficients(0)
    assert nf.delta_coefficients(1).an == {1: 1}


def test_series_mul_matches_schoolbook():
    a = [3, -1, 4, 1, -5, 9, -2, 6]
    b = [2, 7, -1, 8, 2, -8, 1, 8]
    want = [sum(a[i] * b[k - i] for i in range(k + 1)) for k in range(8)]
    assert nf.series_mul(a, b, 8) == want
    big = [10**30, -(10**29), 7]
    assert nf.series_mul(big, big, 3) == [10**60, -2 * 10**59, 10**58 + 14 * 10**30]


def test_sieve_example():
    assert [ell for ell in nf.sieve_S(-7, 11, 3, 1, 50)] == [5, 17, 41, 47]


@pytest.mark.parametrize(
    "D,N,p,m", [(-7, 11, 3, 1), (-163, 1, 3, 2), (-15, 11, 5, 1), (-4, 37, 3, 3), (-23, 1, 7, 1)]
)
def test_sieve_matches_oracle(D, N, p, m):
    assert nf.sieve_S(D, N, p, m, 10**4) == oracles.sieve_oracle(D, N, p, m, 10**4)


def test_sieve_rejects_even_p():
    with pytest.raises(ValueError):
        nf.sieve_S(-7, 11, 2, 1, 50)


def test_primes_up_to():
    assert nf.primes_up_to(1).tolist() == []
    assert nf.primes_up_to(1000).tolist() == oracles.primes_upto(1000)


def test_kolyvagin_sieve(delta):
    got = nf.sieve_kolyvagin(delta, -7, 3, 1, 2000)
    want = [ell for ell in oracles.sieve_oracle(-7, 1, 3, 1, 2000) if 7 % ell and delta[ell] % 3 == 0]
    assert got == want
    assert 5 in got
    with pytest.raises(MissingCoefficients):
        nf.sieve_kolyvagin(nf.delta_coefficients(100), -7, 3, 1, 200)


def test_unit_u(delta):
    ring = CoeffRing(3, 2)
    assert nf.unit_u(delta, 5, ring) == ring(4830 * pow(5**5, -1, 9))
    with pytest.raises(NonInvertibleDenominator):
        nf.unit_u(delta, 3, ring)


def level11(**overrides):
    doc = {
        "schema": "bbreg/1",
        "kind": "newform",
        "label": "11.2.a.a",
        "level": "11",
        "weight": "2",
        "sign": "1",
        "an": {str(n + 1): str(a) for n, a in enumerate(LEVEL11)},
    }
    doc.update(overrides)
    return doc


def test_validation_failures():
    nf.NewformData.from_json(level11())
    with pytest.raises(SchemaError):
        nf.NewformData.from_json(level11(sign="0"))
    with pytest.raises(SchemaError):
        nf.NewformData.from_json(level11(weight="3"))
    with pytest.raises(SchemaError):
        nf.NewformData.from_json(level11(schema="other"))
    with pytest.raises(SchemaError):
        nf.NewformData.from_json(level11(field={"degree": 2}))
    with pytest.raises(SchemaError):
        nf.NewformData.from_json({k: v for k, v in level11().items() if k != "an"})
    an = dict(level11()["an"])
    an["1"] = "2"
    with pytest.raises(SchemaError):
        nf.NewformData.from_json(level11(an=an))
    an = dict(level11()["an"])
    an["6"] = "5"
    with pytest.raises(SchemaError):
        nf.NewformData.from_json(level11(an=an))
    an = dict(level11()["an"])
    del an["7"]
    with pytest.raises(MissingCoefficients):
        nf.NewformData.from_json(level11(an=an))
    f = nf.NewformData.from_json(level11())
    with pytest.raises(MissingCoefficients):
        f[21]


def test_save_and_load_round_trip(tmp_path, delta):
    path = tmp_path / "delta.json"
    small = nf.delta_coefficients(400)
    nf.save_newform(small, path)
    back = nf.load_newform(path)
    assert dict(back.an) == dict(small.an) and back.label == small.label and back.sign == small.sign
    # large coefficients are stored as strings
    assert json.loads(path.read_text())["an"]["400"] == str(delta[400])
    (tmp_path / "bad.json").write_text("{not json")
    with pytest.raises(SchemaError):
        nf.load_newform(tmp_path / "bad.json")
    (tmp_path / "list.json").write_text("[]")
    with pytest.raises(SchemaError):
        nf.load_newform(tmp_path / "list.json")


def test_lmfdb_record_mapping():
    rec = {"label": "11.2.a.a", "level": 11, "weight": 2, "dim": 1, "fricke_eigenval": -1, "traces": LEVEL11}
    f = nf.lmfdb_to_newform(rec)
    # weight 2 and Fricke eigenvalue -1 give root number +1
    assert f.sign == 1 and f.N == 11 and f[2] == -2
    assert nf.lmfdb_to_newform({**rec, "fricke_eigenval": 1}).sign == -1
    with pytest.raises(SchemaError):
        nf.lmfdb_to_newform({**rec, "dim": 2})
    with pytest.raises(SchemaError):
        nf.lmfdb_to_newform({k: v for k, v in rec.items() if k != "traces"})


class _Handler(BaseHTTPRequestHandler):
    hits: list = []

    def do_GET(self):
        type(self).hits.append(self.path)
        if "11.2.a.a" in self.path:
            rec = {"label": "11.2.a.a", "level": 11, "weight": 2, "dim": 1, "fricke_eigenval": -1, "traces": LEVEL11}
            body = json.dumps({"data": [rec]}).encode()
        elif "garbled" in self.path:
            body = b"<html>"
        else:
            body = json.dumps({"data": []}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):
        pass


@pytest.fixture
def server():
    _Handler.hits = []
    httpd = HTTPServer(("127.0.0.1", 0), _Handler)
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{httpd.server_address[1]}/api"
    httpd.shutdown()
    httpd.server_close()


def test_fetch_uses_cache(server, tmp_path):
    f = nf.fetch_newform(server, "11.2.a.a", tmp_path)
    assert [f[n] for n in range(1, 21)] == LEVEL11 and f.sign == 1
    assert len(_Handler.hits) == 1 and "mf_newforms" in _Handler.hits[0]
    again = nf.fetch_newform(server, "11.2.a.a", tmp_path)
    assert len(_Handler.hits) == 1 and dict(again.an) == dict(f.an)


def test_fetch_errors(server, tmp_path):
    with pytest.raises(SchemaError):
        nf.fetch_newform(server, "37.2.a.a", tmp_path)
    with pytest.raises(SchemaError):
        nf.fetch_newform(server, "garbled", tmp_path)
    with pytest.raises(NetworkError):
        nf.fetch_newform("http://127.0.0.1:1/api", "11.2.a.a", tmp_path, timeout=2)
    assert not list(tmp_path.iterdir())


def test_exceptional_check():
    rep = nf.exceptional_check(3, 11, -7, 2)
    assert rep["divides_6ND_fact_phi"] and not rep["ramifies_in_F"]
    assert not rep["exceptional_conjunction"] and rep["exceptional_union"]
    rep = nf.exceptional_check(13, 11, -7, 2)
    # 6 * 11 * 7 * 0! * phi(11) = 4620 = 2^2 * 3 * 5 * 7 * 11
    assert not rep["divides_6ND_fact_phi"] and not rep["flagged"]
    assert nf.exceptional_check(13, 11, -7, 2, field_disc=13)["exceptional_union"]
    assert nf.exceptional_check(2, 11, -7, 2)["flagged"]
    assert nf.euler_phi(36) == 12 and nf.euler_phi(1) == 1
