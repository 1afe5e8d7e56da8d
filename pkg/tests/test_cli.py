import json
import subprocess
import sys

import pytest

from polarlex.cli import main
from polarlex.polarity import read_score_csv

SYNTH_ARGS = [
    "--n-users", "30",
    "--n-tweets", "400",
    "--hashtags-per-community", "12",
    "--seed-fraction", "0.2",
    "--within", "0.9",
    "--cross", "0.1",
    "--rng-seed", "3",
]


def run_synth(out_dir):
    assert main(["synth", "--out-dir", str(out_dir), *SYNTH_ARGS]) == 0


def run_pipeline(out_dir, corpus, seeds, extra=()):
    return main(
        [
            "pipeline",
            "--corpus", str(corpus),
            "--seed-file", str(seeds),
            "--out-dir", str(out_dir),
            "--gamma", "2",
            "--kcore-k", "2",
            *extra,
        ]
    )


@pytest.fixture
def synth_dir(tmp_path):
    out = tmp_path / "synth"
    run_synth(out)
    return out


def test_synth_writes_artifacts(synth_dir):
    for name in ("corpus.jsonl", "gold_users.tsv", "gold_hashtags.tsv",
                 "seeds_community.tsv", "manifest.json"):
        assert (synth_dir / name).is_file(), name


def test_pipeline_produces_all_artifacts(tmp_path, synth_dir):
    out = tmp_path / "run"
    code = run_pipeline(out, synth_dir / "corpus.jsonl", synth_dir / "seeds_community.tsv")
    assert code == 0
    expected = [
        "tokenized.tsv",
        "graph.edges.tsv",
        "graph.nodes.tsv",
        "lexicon_community.tsv",
        "tweet_scores.csv",
        "user_scores.csv",
        "tally.csv",
        "daily_series_community.csv",
        "commnet.graphml",
        "commnet_edges.csv",
        "homophily.csv",
        "manifest.json",
    ]
    for name in expected:
        assert (out / name).is_file(), name
    manifest = json.loads((out / "manifest.json").read_text())
    declared = set(manifest["outputs"])
    on_disk = {p.name for p in out.iterdir()} - {"manifest.json"}
    assert on_disk <= declared


def test_pipeline_deterministic_reruns(tmp_path, synth_dir):
    out = tmp_path / "run"
    corpus = synth_dir / "corpus.jsonl"
    seeds = synth_dir / "seeds_community.tsv"
    assert run_pipeline(out, corpus, seeds) == 0
    snapshot = {
        p.name: p.read_bytes() for p in out.iterdir() if p.name != "manifest.json"
    }
    first_manifest = json.loads((out / "manifest.json").read_text())
    assert run_pipeline(out, corpus, seeds) == 0
    for name, blob in snapshot.items():
        assert (out / name).read_bytes() == blob, name
    second_manifest = json.loads((out / "manifest.json").read_text())
    first_manifest.pop("timestamp")
    second_manifest.pop("timestamp")
    assert first_manifest == second_manifest


def test_build_graph_without_ingest_exit_one(tmp_path, capsys):
    code = main(["build-graph", "--out-dir", str(tmp_path)])
    assert code == 1
    assert "tokenized.tsv" in capsys.readouterr().err


def test_score_without_lexicons_exit_one(tmp_path, synth_dir, capsys):
    code = main(
        [
            "score",
            "--corpus", str(synth_dir / "corpus.jsonl"),
            "--out-dir", str(tmp_path / "empty"),
        ]
    )
    assert code == 1
    assert "lexicon" in capsys.readouterr().err


def test_propagate_missing_seed_file_exit_one(tmp_path, capsys):
    code = main(
        ["propagate", "--out-dir", str(tmp_path), "--seed-file", str(tmp_path / "nope.tsv")]
    )
    assert code == 1
    assert "nope.tsv" in capsys.readouterr().err


def test_missing_subcommand_exit_one(capsys):
    assert main([]) == 1


def test_bad_flag_value_exit_one(tmp_path, capsys):
    code = main(["synth", "--out-dir", str(tmp_path), "--seed-fraction", "7"])
    assert code == 1
    assert "seed_fraction" in capsys.readouterr().err


def test_corrupt_corpus_exit_two(tmp_path, capsys):
    corpus = tmp_path / "bad.jsonl"
    corpus.write_text("{not json\n")
    code = main(["ingest", "--corpus", str(corpus), "--out-dir", str(tmp_path / "o")])
    assert code == 2
    assert "line 1" in capsys.readouterr().err


def test_failed_run_removes_partial_outputs(tmp_path):
    corpus = tmp_path / "bad.jsonl"
    corpus.write_text(
        '{"tweet_id": "t1", "user_id": "u", "timestamp": "2020-01-01T00:00:00Z", "text": "x"}\n'
        "{broken\n"
    )
    out = tmp_path / "o"
    assert main(["ingest", "--corpus", str(corpus), "--out-dir", str(out)]) == 2
    assert not (out / "tokenized.tsv").exists()
    assert not (out / "manifest.json").exists()


def test_eval_against_synth_gold(tmp_path, synth_dir):
    out = tmp_path / "run"
    assert run_pipeline(out, synth_dir / "corpus.jsonl", synth_dir / "seeds_community.tsv") == 0
    code = main(
        [
            "eval",
            "--out-dir", str(out),
            "--gold", str(synth_dir / "gold_users.tsv"),
        ]
    )
    assert code == 0
    poles = (out / "eval_poles.csv").read_text().splitlines()
    assert poles[0] == "dimension,pole,precision,recall,pct_unknown,pct_incorrect"
    assert len(poles) == 3
    # planted communities are easy; both poles should recall most users
    for line in poles[1:]:
        recall = float(line.split(",")[3])
        assert recall > 0.5


def test_eval_user_day_unit(tmp_path, synth_dir):
    from polarlex.corpus import group_by_user_day, load_corpus

    out = tmp_path / "run"
    assert run_pipeline(out, synth_dir / "corpus.jsonl", synth_dir / "seeds_community.tsv") == 0
    records = load_corpus(synth_dir / "corpus.jsonl")
    labels = dict(
        line.split("\t") for line in (synth_dir / "gold_users.tsv").read_text().splitlines()
    )
    gold = tmp_path / "gold_days.tsv"
    rows = []
    for key in list(group_by_user_day(records))[:40]:
        rows.append(f"{key.user_id}@{key.day.isoformat()}\t{labels[key.user_id]}")
    gold.write_text("\n".join(rows) + "\n")
    code = main(
        [
            "eval",
            "--out-dir", str(out),
            "--corpus", str(synth_dir / "corpus.jsonl"),
            "--gold", str(gold),
            "--eval-unit", "user_day",
        ]
    )
    assert code == 0
    assert (out / "eval_overall.csv").is_file()
    overall = (out / "eval_overall.csv").read_text().splitlines()[1]
    accuracy = float(overall.split(",")[1])
    assert accuracy > 0.5


def test_config_file_with_flag_override(tmp_path, synth_dir):
    config = tmp_path / "config.json"
    config.write_text(
        json.dumps(
            {
                "corpus": str(synth_dir / "corpus.jsonl"),
                "seed_files": [str(synth_dir / "seeds_community.tsv")],
                "out_dir": str(tmp_path / "from_config"),
                "gamma": 2,
                "kcore_k": 2,
            }
        )
    )
    assert main(["pipeline", "--config", str(config)]) == 0
    assert (tmp_path / "from_config" / "tweet_scores.csv").is_file()
    override = tmp_path / "override"
    assert main(["pipeline", "--config", str(config), "--out-dir", str(override)]) == 0
    assert (override / "tweet_scores.csv").is_file()


def test_config_unknown_key_rejected(tmp_path, capsys):
    config = tmp_path / "config.json"
    config.write_text('{"no_such_knob": 1}')
    assert main(["synth", "--config", str(config), "--out-dir", str(tmp_path / "o")]) == 1
    assert "no_such_knob" in capsys.readouterr().err


def test_env_var_selects_config(tmp_path, synth_dir, monkeypatch):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"out_dir": str(tmp_path / "envout"), **{
        "n_users": 10, "n_tweets": 50, "hashtags_per_community": 5, "rng_seed": 1,
    }}))
    monkeypatch.setenv("POLARLEX_CONFIG", str(config))
    assert main(["synth"]) == 0
    assert (tmp_path / "envout" / "corpus.jsonl").is_file()


def test_console_entry_point(tmp_path):
    result = subprocess.run(
        [sys.executable, "-m", "polarlex.cli", "--version"],
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0
    assert "polarlex" in result.stdout


def test_embedding_mode_stages(tmp_path, synth_dir):
    # embedding-similarity graph + random-walk propagation on the [0,1] scale
    emb = tmp_path / "emb.txt"
    rows = []
    for i in range(12):
        base = [1.0, 0.0] if i % 2 == 0 else [0.0, 1.0]
        rows.append(f"w{i:02d} {base[0] + 0.01 * i} {base[1] + 0.02 * i}")
    emb.write_text("\n".join(rows) + "\n")
    seeds = tmp_path / "seeds.tsv"
    seeds.write_text(
        "#dimension=axis\tvalue_a=1.000000000\tvalue_b=0.000000000\n"
        "w00\tA\nw01\tB\n"
    )
    out = tmp_path / "emb_run"
    common = ["--out-dir", str(out), "--mode", "embedding", "--embeddings", str(emb)]
    assert main(["build-graph", *common, "--knn-k", "3"]) == 0
    assert (out / "graph.edges.tsv").is_file()
    assert main(["propagate", *common, "--seed-file", str(seeds)]) == 0
    lexicon = (out / "lexicon_axis.tsv").read_text().splitlines()
    assert lexicon[0].endswith("scale=0.000000000,1.000000000")
    assert len(lexicon) == 13


def test_token_mode_pipeline(tmp_path, synth_dir):
    out = tmp_path / "token_run"
    code = run_pipeline(
        out,
        synth_dir / "corpus.jsonl",
        synth_dir / "seeds_community.tsv",
        extra=["--mode", "token", "--vocab-cap", "50"],
    )
    assert code == 0
    scores = read_score_csv(out / "tweet_scores.csv")
    assert "community" in scores
