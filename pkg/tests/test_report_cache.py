import json
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from blowup_spectra import cache as C
from blowup_spectra.errors import CacheCorruptionError
from blowup_spectra.report import Report


def _report(i=0, version=None):
    kw = {} if version is None else {"tool_version": version}
    return Report("refine", {"seed": complex(-0.5, i), "rtol": 1e-10},
                  {"lam": np.complex128(-0.542466 + 0j), "flags": np.array([True, False]),
                   "n": np.int64(3)}, {"total_ms": 1.5}, **kw)


def test_round_trip():
    r = _report().normalized()
    back = Report.from_json(r.to_json())
    assert back == r
    assert back.results["lam"] == complex(-0.542466, 0)
    assert back.to_json() == r.to_json()


def test_schema_check():
    data = json.loads(_report().to_json())
    data["schema_version"] = "0"
    with pytest.raises(ValueError):
        Report.from_json(json.dumps(data))


def test_put_get_byte_identical(tmp_path):
    cache = C.Cache(tmp_path)
    r = _report().normalized()
    key = cache.put(r)
    assert cache.get(key).to_json() == r.to_json()
    assert cache.lookup("refine", r.inputs) == r


def test_version_bump_misses(tmp_path):
    cache = C.Cache(tmp_path)
    r = _report(version="0.0.1").normalized()
    cache.put(r)
    assert cache.lookup("refine", r.inputs) is None
    assert cache.entries() == []
    assert C.cache_key("refine", r.inputs, "0.0.1") != C.cache_key("refine", r.inputs)


def test_concurrent_writers(tmp_path):
    cache = C.Cache(tmp_path)
    reports = [_report(i).normalized() for i in range(8)]
    with ThreadPoolExecutor(8) as pool:
        keys = list(pool.map(cache.put, reports))
    assert len(set(keys)) == 8
    for k, r in zip(keys, reports):
        assert cache.get(k) == r
    assert not list(tmp_path.glob(".tmp-*"))


def test_corrupt_entry_raises(tmp_path):
    cache = C.Cache(tmp_path)
    key = cache.put(_report().normalized())
    (tmp_path / f"{key}.json").write_text("{not json")
    with pytest.raises(CacheCorruptionError):
        cache.get(key)


def test_key_mismatch_raises(tmp_path):
    cache = C.Cache(tmp_path)
    key = cache.put(_report().normalized())
    other = "0" * 64
    (tmp_path / f"{other}.json").write_text((tmp_path / f"{key}.json").read_text())
    with pytest.raises(CacheCorruptionError):
        cache.get(other)


def test_env_override(monkeypatch, tmp_path):
    monkeypatch.setenv(C.ENV_VAR, str(tmp_path))
    assert C.Cache().dir == tmp_path
