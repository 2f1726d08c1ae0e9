import itertools

import numpy as np
import pytest

from costmodel import (connectivity_table, cost_max, cost_out, cost_smj, is_connected, validate_cardinalities,
                       x_log_x)
from errors import InvalidInputError
from models import JoinTree

leaf = JoinTree.leaf
join = JoinTree.join


def random_tree(rng, relations):
    if len(relations) == 1:
        return leaf(relations[0])
    relations = list(rng.permutation(relations))
    cut = int(rng.integers(1, len(relations)))
    return join(random_tree(rng, relations[:cut]), random_tree(rng, relations[cut:]))


def swap_children(tree):
    if tree.is_leaf:
        return tree
    return join(swap_children(tree.right), swap_children(tree.left))


class TestCosts:
    def test_leaf_costs_nothing(self, three_relations):
        assert cost_out(leaf(0), three_relations) == 0
        assert cost_max(leaf(0), three_relations) == 0
        assert cost_smj(leaf(0), three_relations) == 0

    def test_worked_instance(self, three_relations):
        best = join(join(leaf(1), leaf(2)), leaf(0))
        assert cost_out(best, three_relations) == 13
        assert cost_max(best, three_relations) == 8
        assert cost_out(join(join(leaf(0), leaf(1)), leaf(2)), three_relations) == 18
        assert cost_max(join(join(leaf(0), leaf(2)), leaf(1)), three_relations) == 20

    def test_sort_merge_pair(self, make_instance):
        q = make_instance(2, {0b01: 4, 0b10: 8, 0b11: 10})
        assert cost_smj(join(leaf(0), leaf(1)), q) == pytest.approx(4 * 2 + 8 * 3)

    def test_unit_cardinality_contributes_nothing(self):
        assert x_log_x(1) == 0
        assert x_log_x(0) == 0

    def test_tree_outside_instance(self, three_relations):
        with pytest.raises(InvalidInputError):
            cost_out(join(leaf(0), leaf(5)), three_relations)

    def test_cross_product_rejected_when_disabled(self, chain_four):
        with pytest.raises(InvalidInputError):
            cost_out(join(join(leaf(0), leaf(2)), join(leaf(1), leaf(3))), chain_four)

    def test_cost_properties_on_random_trees(self, clique):
        rng = np.random.default_rng(11)
        q = clique(6, seed=3)
        for _ in range(30):
            tree = random_tree(rng, list(range(6)))
            spans = [node.relations for node in tree.inner_nodes()]
            assert cost_out(tree, q) == sum(q.c(s) for s in spans)
            assert cost_max(tree, q) == max(q.c(s) for s in spans)
            assert cost_out(tree, q) >= cost_max(tree, q)
            swapped = swap_children(tree)
            assert cost_out(swapped, q) == cost_out(tree, q)
            assert cost_max(swapped, q) == cost_max(tree, q)
            assert cost_smj(swapped, q) == pytest.approx(cost_smj(tree, q))


class TestConnectivity:
    def test_clique_always_connected(self, three_relations):
        assert all(is_connected(s, three_relations) for s in range(1, 8))

    def test_chain(self, make_instance):
        q = make_instance(3, {1: 1, 2: 1, 4: 1}, edges=[(0, 1), (1, 2)])
        assert not is_connected(0b101, q)
        assert is_connected(0b011, q)
        assert is_connected(0b100, q)

    def test_table_agrees_with_graph_check(self, make_instance):
        rng = np.random.default_rng(12)
        n = 7
        pairs = list(itertools.combinations(range(n), 2))
        for _ in range(5):
            chosen = [pairs[i] for i in rng.choice(len(pairs), size=8, replace=False)]
            q = make_instance(n, {1 << i: 1 for i in range(n)}, edges=chosen)
            table = connectivity_table(q)
            assert not table[0]
            assert table[1:].tolist() == [is_connected(s, q) for s in range(1, 1 << n)]

    def test_empty_set(self, three_relations):
        with pytest.raises(InvalidInputError):
            is_connected(0, three_relations)


class TestCardinalityChecks:
    def test_violation_reported(self, make_instance):
        q = make_instance(2, {0b01: 2, 0b10: 3, 0b11: 7})
        assert validate_cardinalities(q) == [(0b11, 0b01, 0b10)]

    def test_equality_allowed(self, make_instance):
        q = make_instance(2, {0b01: 2, 0b10: 3, 0b11: 6})
        assert validate_cardinalities(q) == []

    def test_generated_instances_are_clean(self, clique):
        for n in range(2, 9):
            assert validate_cardinalities(clique(n, seed=n)) == []
