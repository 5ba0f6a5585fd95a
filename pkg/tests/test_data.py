"""Dataset ingestion, binarization, splitting, and the synthetic generator."""

import numpy as np
import pytest
import scipy.sparse.csgraph as csgraph

from fairhd.data import (
    TRAIN,
    BinarizerSpec,
    ColumnRule,
    ColumnSchema,
    SyntheticSpec,
    binarize,
    build_neighbor_lists,
    fit_binarizer,
    generate_synthetic,
    load_dataset,
    load_edge_list,
    save_dataset,
    split,
)
from fairhd.errors import (
    GraphIntegrityError,
    ParseError,
    SchemaError,
    SplitError,
    SyntheticSpecError,
)


def write_toy_files(tmp_path, edge_text, node_text):
    edges = tmp_path / "edges.txt"
    nodes = tmp_path / "nodes.csv"
    edges.write_text(edge_text)
    nodes.write_text(node_text)
    return edges, nodes


TOY_NODES = (
    "label,sensitive,f0,f1\n"
    "0,0,1,0\n"
    "1,1,0,1\n"
    "0,0,1,1\n"
)


def test_load_dataset_toy_graph(tmp_path):
    edges, nodes = write_toy_files(tmp_path, "0 1\n1 2\n", TOY_NODES)
    ds, report = load_dataset(edges, nodes, ColumnSchema("label", "sensitive"))
    assert ds.num_nodes == 3
    assert [len(nb) for nb in ds.neighbor_lists] == [1, 2, 1]
    assert report.num_edges == 2
    assert np.array_equal(ds.labels, [0, 1, 0])
    assert np.array_equal(ds.features_binary, [[1, 0], [0, 1], [1, 1]])
    assert report.class_group_counts == {(0, 0): 2, (1, 1): 1}


def test_duplicate_edges_and_self_loops_reported(tmp_path):
    edges, nodes = write_toy_files(tmp_path, "0 1\n0 1\n1 0\n2 2\n", TOY_NODES)
    ds, report = load_dataset(edges, nodes, ColumnSchema("label", "sensitive"))
    assert [len(nb) for nb in ds.neighbor_lists] == [1, 1, 0]
    assert report.dropped_duplicate_edges == 2
    assert report.dropped_self_loops == 1


def test_dangling_edge_rejected(tmp_path):
    edges, nodes = write_toy_files(tmp_path, "0 9\n", TOY_NODES)
    with pytest.raises(GraphIntegrityError):
        load_dataset(edges, nodes, ColumnSchema("label", "sensitive"))


def test_missing_column_rejected(tmp_path):
    edges, nodes = write_toy_files(tmp_path, "0 1\n", TOY_NODES)
    with pytest.raises(SchemaError):
        load_dataset(edges, nodes, ColumnSchema("label", "nope"))


def test_non_numeric_feature_reported_with_location(tmp_path):
    bad = TOY_NODES.replace("0,0,1,1", "0,0,oops,1")
    edges, nodes = write_toy_files(tmp_path, "0 1\n", bad)
    with pytest.raises(ParseError, match="f0.*row 2"):
        load_dataset(edges, nodes, ColumnSchema("label", "sensitive"))


def test_edge_list_accepts_commas_and_comments(tmp_path):
    path = tmp_path / "e.txt"
    path.write_text("# comment\n0,1\n1 2\n\n")
    src, dst = load_edge_list(path)
    assert list(src) == [0, 1] and list(dst) == [1, 2]


def test_edge_list_bad_line_rejected(tmp_path):
    path = tmp_path / "e.txt"
    path.write_text("0 1 2\n")
    with pytest.raises(ParseError, match="e.txt:1"):
        load_edge_list(path)


def test_build_neighbor_lists_sorted_dedup():
    # (3,1) and (1,3) collapse, as do (0,1) and (1,0); (2,2) is a self-loop.
    lists, loops, dups, n_edges = build_neighbor_lists(
        4, [3, 0, 1, 1, 2], [1, 1, 3, 0, 2]
    )
    assert loops == 1 and dups == 2 and n_edges == 2
    assert list(lists[1]) == [0, 3]


def test_roundtrip_save_load(tmp_path):
    ds = generate_synthetic(SyntheticSpec(nodes_per_block=30, seed=5))
    save_dataset(ds, tmp_path / "e.txt", tmp_path / "n.csv")
    ds2, _ = load_dataset(tmp_path / "e.txt", tmp_path / "n.csv",
                          ColumnSchema("label", "sensitive"))
    assert ds2.num_nodes == ds.num_nodes
    assert np.array_equal(ds2.labels, ds.labels)
    assert np.array_equal(ds2.sensitive, ds.sensitive)
    assert np.array_equal(ds2.features_binary, ds.features_binary)
    for a, b in zip(ds.neighbor_lists, ds2.neighbor_lists):
        assert np.array_equal(a, b)


# ---------------------------------------------------------------------------
# Binarization


def test_passthrough_binary_column_unchanged():
    raw = np.array([[0.0], [1.0], [1.0]])
    spec = fit_binarizer(raw, BinarizerSpec.auto(raw))
    assert np.array_equal(binarize(raw, spec), [[0], [1], [1]])


def test_quantile_median_split():
    raw = np.array([[1.0], [2.0], [3.0], [4.0]])
    spec = fit_binarizer(raw, BinarizerSpec(rules=[ColumnRule("quantile", q=2)]))
    out = binarize(raw, spec)
    assert np.array_equal(out, [[1, 0], [1, 0], [0, 1], [0, 1]])


def test_threshold_rule():
    raw = np.array([[-1.0], [5.0]])
    spec = fit_binarizer(raw, BinarizerSpec(rules=[ColumnRule("threshold", theta=0.0)]))
    assert np.array_equal(binarize(raw, spec), [[0], [1]])


def test_constant_column_collapses_with_warning():
    raw = np.array([[2.0], [2.0], [2.0]])
    with pytest.warns(UserWarning, match="constant"):
        spec = fit_binarizer(raw, BinarizerSpec(rules=[ColumnRule("quantile", q=4)]))
    out = binarize(raw, spec)
    assert np.array_equal(out, [[1], [1], [1]])


def test_binarizer_fit_on_train_rows_only():
    raw = np.array([[1.0], [2.0], [3.0], [100.0]])
    fit_mask = np.array([True, True, True, False])
    spec = fit_binarizer(raw, BinarizerSpec(rules=[ColumnRule("quantile", q=2)]),
                         fit_mask=fit_mask)
    out = binarize(raw, spec)
    # The held-out extreme value falls in the top bin of the train-fitted edges.
    assert np.array_equal(out[3], [0, 1])
    assert out.sum(axis=1).tolist() == [1, 1, 1, 1]


def test_unfitted_spec_rejected():
    with pytest.raises(SchemaError):
        binarize(np.array([[1.0]]), BinarizerSpec(rules=[ColumnRule("quantile")]))


# ---------------------------------------------------------------------------
# Splitting


def test_split_balanced_fraction_half():
    ds = generate_synthetic(SyntheticSpec(nodes_per_block=50, seed=1))
    split(ds, 0.5, 0)
    n_train = int(ds.train_mask().sum())
    assert abs(n_train - 50) <= 4
    for c in range(ds.num_classes):
        assert np.any(ds.train_mask() & (ds.labels == c))
        assert np.any(ds.test_mask() & (ds.labels == c))


def test_split_deterministic_under_seed():
    ds = generate_synthetic(SyntheticSpec(nodes_per_block=40, seed=2))
    split(ds, 0.5, 9)
    first = ds.split.copy()
    split(ds, 0.5, 9)
    assert np.array_equal(ds.split, first)
    split(ds, 0.5, 10)
    assert not np.array_equal(ds.split, first)


def test_split_cells_with_two_members_hit_both_sides():
    ds = generate_synthetic(SyntheticSpec(nodes_per_block=50, seed=3))
    split(ds, 0.5, 0)
    cells = np.unique(np.stack([ds.labels, ds.sensitive], axis=1), axis=0)
    for c, g in cells:
        idx = (ds.labels == c) & (ds.sensitive == g)
        if idx.sum() >= 2:
            assert np.any(idx & ds.train_mask())
            assert np.any(idx & ds.test_mask())


def test_split_bad_fraction_rejected():
    ds = generate_synthetic(SyntheticSpec(nodes_per_block=10, seed=0))
    for frac in (0.0, 1.0, -0.1):
        with pytest.raises(SplitError):
            split(ds, frac, 0)


def test_split_extreme_fraction_keeps_class_coverage():
    ds = generate_synthetic(SyntheticSpec(nodes_per_block=10, seed=4))
    split(ds, 0.99, 0)
    for c in range(ds.num_classes):
        assert np.any(ds.train_mask() & (ds.labels == c))


# ---------------------------------------------------------------------------
# Synthetic generator


def test_synthetic_bit_identical_regeneration():
    spec = SyntheticSpec(nodes_per_block=40, seed=6)
    a = generate_synthetic(spec)
    b = generate_synthetic(spec)
    assert np.array_equal(a.labels, b.labels)
    assert np.array_equal(a.features_binary, b.features_binary)
    for x, y in zip(a.neighbor_lists, b.neighbor_lists):
        assert np.array_equal(x, y)


def test_synthetic_zero_bias_has_small_label_gap():
    ds = generate_synthetic(SyntheticSpec(nodes_per_block=1000, bias=0.0, seed=0))
    rates = [np.mean(ds.labels[ds.sensitive == g]) for g in (0, 1)]
    assert abs(rates[0] - rates[1]) < 0.05


def test_synthetic_bias_concentrates_near_target():
    ds = generate_synthetic(SyntheticSpec(nodes_per_block=1000, bias=0.4, seed=0))
    rates = [np.mean(ds.labels[ds.sensitive == g]) for g in (0, 1)]
    assert 0.3 <= rates[0] - rates[1] <= 0.5


def test_synthetic_no_cross_edges_gives_two_components():
    ds = generate_synthetic(SyntheticSpec(nodes_per_block=60, p_in=0.2, p_out=0.0, seed=1))
    n_comp, comp = csgraph.connected_components(ds.adjacency(), directed=False)
    # Every component stays within one block.
    for g in (0, 1):
        assert len(np.intersect1d(comp[ds.sensitive == 0], comp[ds.sensitive == 1])) == 0


def test_synthetic_degenerate_spec_rejected():
    with pytest.raises(SyntheticSpecError):
        generate_synthetic(SyntheticSpec(nodes_per_block=0))
    with pytest.raises(SyntheticSpecError):
        generate_synthetic(SyntheticSpec(bias=1.5))
    with pytest.raises(SyntheticSpecError):
        generate_synthetic(SyntheticSpec(num_binary_features=1))
