import json
import os

import pytest

from symabs.cli import main
from symabs.core import save_generator_set, standard_generators
from symabs.engine import AbstractionFamily
from symabs.partition import load_partition, save_partition

TOY_GENS = {
    "name": "toy",
    "n": 2,
    "generators": [
        {"name": "t(1,1)", "kind": "translation", "u": [1, 1]},
        {"name": "t(2,1)", "kind": "translation", "u": [2, 1]},
        {"name": "swap", "kind": "permutation", "A": [[0, 1], [1, 0]], "u": [0, 0]},
    ],
}


def write_toy_gens(tmp_path):
    path = tmp_path / "gens.json"
    path.write_text(json.dumps(TOY_GENS))
    return str(path)


def run(args):
    return main([str(a) for a in args])


class TestGenerate:
    def test_toy_run(self, tmp_path, capsys):
        gens = write_toy_gens(tmp_path)
        out = tmp_path / "fam"
        code = run(["generate", "--generators", gens, "--lo=-1,-1", "--hi=1,1", "--out", out])
        assert code == 0
        printed = capsys.readouterr().out
        assert "subsets scheduled: 8" in printed
        assert "subsets computed: 8" in printed
        fam = AbstractionFamily.load(out)
        assert len(fam.entries) == 8
        assert fam.entries[0b011].cell_count == 1
        dag = json.loads((out / "dag.json").read_text())
        assert len(dag["nodes"]) == 7
        assert (out / "dag.dot").read_text().startswith("// edge")
        assert (out / "entries.tsv").read_text().count("\n") == 9
        assert (out / "dag.png").exists()

    def test_deterministic_reruns(self, tmp_path):
        gens = write_toy_gens(tmp_path)
        outs = []
        for tag in ("a", "b"):
            out = tmp_path / tag
            assert run(["generate", "--generators", gens, "--lo=-1,-1", "--hi=1,1", "--no-figures", "--out", out]) == 0
            outs.append(out)
        for name in ("manifest.json", "dag.json", "dag.dot", "entries.tsv",
                     "partitions/3.json"):
            assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()

    def test_empty_generator_file(self, tmp_path, capsys):
        path = tmp_path / "none.json"
        path.write_text(json.dumps({"name": "none", "generators": []}))
        out = tmp_path / "fam"
        code = run(["generate", "--generators", path, "--n", "2",
                    "--lo=0,0", "--hi=1,1", "--no-figures", "--out", out])
        assert code == 0
        fam = AbstractionFamily.load(out)
        assert list(fam.entries) == [0]
        assert fam.entries[0].cell_count == 4

    def test_pruned_scheduling_report(self, tmp_path, capsys):
        out = tmp_path / "fam"
        code = run(["generate", "--n", "4", "--tau", "4", "--prune",
                    "--lo=0", "--hi=0", "--no-figures", "--max-k", "1",
                    "--out", out])
        assert code == 0
        printed = capsys.readouterr().out
        assert "subsets scheduled: 31232" in printed

    def test_desk_scale_bound_without_full_run(self, tmp_path, capsys):
        out = tmp_path / "fam"
        code = run(["generate", "--n", "4", "--tau", "4",
                    "--lo=0", "--hi=0", "--no-figures", "--out", out])
        assert code == 3
        assert "subsets scheduled: 33554432" in capsys.readouterr().out

    def test_strict_flags_approximate(self, tmp_path, capsys):
        gens = write_toy_gens(tmp_path)
        out = tmp_path / "fam"
        code = run(["generate", "--generators", gens, "--lo=-1,-1", "--hi=1,1", "--max-k", "0", "--strict",
                    "--no-figures", "--out", out])
        assert code == 3

    def test_usage_error(self):
        assert run(["generate"]) == 1

    def test_missing_generator_file(self, tmp_path):
        assert run(["generate", "--generators", tmp_path / "nope.json",
                    "--out", tmp_path / "x"]) == 2


class TestRelate:
    def test_equal(self, tmp_path, capsys):
        gens = write_toy_gens(tmp_path)
        out = tmp_path / "fam"
        run(["generate", "--generators", gens, "--lo=-1,-1", "--hi=1,1",
             "--no-figures", "--out", out])
        capsys.readouterr()
        p = out / "partitions" / "1.json"
        assert run(["relate", p, p]) == 0
        assert capsys.readouterr().out.strip() == "equal"

    def test_toy_incomparable(self, tmp_path, capsys):
        gens = write_toy_gens(tmp_path)
        out = tmp_path / "fam"
        run(["generate", "--generators", gens, "--lo=-1,-1", "--hi=1,1",
             "--no-figures", "--out", out])
        capsys.readouterr()
        code = run(["relate", out / "partitions" / "1.json",
                    out / "partitions" / "4.json"])
        assert code == 0
        assert capsys.readouterr().out.strip() == "incomparable"

    def test_concept_chain_direction(self, tmp_path, capsys):
        # the multiset-level partition is coarser than the vector level
        from symabs.engine import ExpansionPolicy, induction_family
        from symabs.music import ConceptLevel, music_generator_set
        from symabs.core import Window
        genset, masks = music_generator_set(2)
        fam = induction_family(genset, Window((0, 0), (5, 5)),
                               ExpansionPolicy(max_k=14),
                               masks=sorted(masks.values()))
        p1 = tmp_path / "s1.json"
        p2 = tmp_path / "s2.json"
        save_partition(fam.entries[masks[ConceptLevel.PITCH_CLASS_VECTOR]], p1)
        save_partition(fam.entries[masks[ConceptLevel.PITCH_CLASS_MULTISET]], p2)
        assert run(["relate", p2, p1]) == 0
        assert capsys.readouterr().out.strip() == "coarser"

    def test_window_mismatch_is_data_error(self, tmp_path):
        a = tmp_path / "a.json"
        b = tmp_path / "b.json"
        a.write_text(json.dumps({"window": {"lo": [0], "hi": [1]},
                                 "labels": [0, 1]}))
        b.write_text(json.dumps({"window": {"lo": [0], "hi": [2]},
                                 "labels": [0, 1, 2]}))
        assert run(["relate", a, b]) == 2

    def test_schema_error(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"window": {"lo": [0], "hi": [1]},
                                   "labels": [0, 2]}))
        assert run(["relate", bad, bad]) == 2


class TestLabel:
    def test_table_to_stdout(self, tmp_path, capsys):
        chords = tmp_path / "c.csv"
        chords.write_text("60,64,67,71\n65,69,72,76\n")
        assert run(["label", "--chords", chords, "--n", "4"]) == 0
        out = capsys.readouterr().out
        lines = out.strip().split("\n")
        assert lines[0] == "chord\ts1\ts2\ts3"
        s3 = [line.split("\t")[3] for line in lines[1:]]
        assert s3[0] == s3[1]

    def test_range_validation(self, tmp_path):
        chords = tmp_path / "c.csv"
        chords.write_text("200,64\n")
        assert run(["label", "--chords", chords, "--n", "2",
                    "--range", "21,108"]) == 2


class TestLearn:
    def _family_dir(self, tmp_path):
        # rows and columns over the 2x2 grid, written as a family directory
        from symabs.core import GeneratorSet, AffineMap, Window
        from symabs.engine import induction_family
        gs = GeneratorSet("axes", (AffineMap.translation((1, 0)),
                                   AffineMap.translation((0, 1))))
        fam = induction_family(gs, Window((0, 0), (1, 1)),
                               masks=[0b01, 0b10])
        out = tmp_path / "family"
        fam.save(out)
        return out

    def test_product_measure_two_rules(self, tmp_path, capsys):
        famdir = self._family_dir(tmp_path)
        chords = tmp_path / "corpus.csv"
        rows = []
        weights = {(0, 0): 42, (1, 0): 28, (0, 1): 18, (1, 1): 12}
        for (a, b), count in sorted(weights.items()):
            rows += [f"{a},{b}"] * count
        chords.write_text("\n".join(rows) + "\n")
        out = tmp_path / "learn"
        code = run(["learn", "--chords", chords, "--n", "2",
                    "--family", famdir, "--max-rules", "5",
                    "--eps", "1e-9", "--out", out])
        assert code == 0
        printed = capsys.readouterr().out
        assert "rules learned: 2" in printed
        trace = [json.loads(line)
                 for line in (out / "trace.jsonl").read_text().splitlines()]
        assert len(trace) == 2
        assert {rec["k"] for rec in trace} == {1, 2}
        assert all(set(rec) == {"k", "subset", "divergence", "studentEntropy"}
                   for rec in trace)
        assert (out / "learning.png").exists()
        assert (out / "trace.tsv").read_text().startswith("k\tsubset")

    def test_uniform_corpus_learns_nothing(self, tmp_path, capsys):
        famdir = self._family_dir(tmp_path)
        chords = tmp_path / "corpus.csv"
        chords.write_text("0,0\n1,0\n0,1\n1,1\n")
        out = tmp_path / "learn"
        code = run(["learn", "--chords", chords, "--n", "2",
                    "--family", famdir, "--out", out])
        assert code == 0
        assert "rules learned: 0" in capsys.readouterr().out
        assert (out / "trace.jsonl").read_text() == ""

    def test_single_chord_corpus_terminates(self, tmp_path, capsys):
        famdir = self._family_dir(tmp_path)
        chords = tmp_path / "corpus.csv"
        chords.write_text("1,1\n")
        out = tmp_path / "learn"
        code = run(["learn", "--chords", chords, "--n", "2",
                    "--family", famdir, "--max-rules", "4", "--out", out])
        assert code == 0
        assert "rules learned:" in capsys.readouterr().out

    def test_corpus_outside_family_window(self, tmp_path):
        famdir = self._family_dir(tmp_path)
        chords = tmp_path / "corpus.csv"
        chords.write_text("7,9\n")
        assert run(["learn", "--chords", chords, "--n", "2",
                    "--family", famdir, "--out", tmp_path / "x"]) == 2
