import pytest
from hypothesis import given, strategies as st

from balis.errors import ConfigError
from balis.seeds import Seed, derive_subseed


def test_distinct_indices_give_distinct_values():
    s = Seed(123)
    assert derive_subseed(s, "trial", 0).value != derive_subseed(s, "trial", 1).value


def test_derivation_is_pure():
    s = Seed(9)
    assert derive_subseed(s, "trial", 7).value == derive_subseed(s, "trial", 7).value


def test_path_sensitivity():
    s = Seed(5)
    nested = derive_subseed(derive_subseed(s, "trial", 0), "copy", 2)
    flat = derive_subseed(s, "copy", 2)
    assert nested.value != flat.value
    assert nested.path == (("trial", 0), ("copy", 2))


def test_rejects_bad_master_and_labels():
    with pytest.raises(ConfigError):
        Seed(-1)
    with pytest.raises(ConfigError):
        Seed(1 << 64)
    with pytest.raises(ConfigError):
        Seed(3).derive("")


@given(
    st.integers(min_value=0, max_value=(1 << 64) - 1),
    st.lists(
        st.tuples(st.sampled_from(["trial", "copy", "graph", "run"]),
                  st.integers(min_value=0, max_value=1000)),
        max_size=4,
    ),
)
def test_value_is_a_function_of_master_and_path(master, path):
    a = Seed(master, tuple(path))
    b = Seed(master, tuple(path))
    assert a.value == b.value
    assert 0 <= a.value < 1 << 64


def test_rng_streams_differ_across_subseeds():
    s = Seed(77)
    x = derive_subseed(s, "a", 0).rng().random(4).tolist()
    y = derive_subseed(s, "a", 1).rng().random(4).tolist()
    assert x != y
