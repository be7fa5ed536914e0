import shutil

import pytest

from abbrkit.cli import main

from abbrkit import corpus
from abbrkit.identifiers import load_bigram_model


@pytest.fixture()
def toy_corpus(tmp_path, data_dir):
    corpus_dir = tmp_path / "corpus"
    corpus_dir.mkdir()
    for name in ("bio1.txt", "bio2.txt"):
        shutil.copy(data_dir / name, corpus_dir / name)
    return corpus_dir


class TestStats:
    def test_totals_row(self, toy_corpus, tmp_path):
        out = tmp_path / "stats.tsv"
        code = main(["stats", "--corpus", str(toy_corpus), "--out", str(out)])
        assert code == 0
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[-1] == "total\t6\t8\t6\t"

    def test_idempotent_bytes(self, toy_corpus, tmp_path):
        out = tmp_path / "stats.tsv"
        main(["stats", "--corpus", str(toy_corpus), "--out", str(out), "--seed", "3"])
        first = out.read_bytes()
        main(["stats", "--corpus", str(toy_corpus), "--out", str(out), "--seed", "3"])
        assert out.read_bytes() == first

    def test_empty_directory(self, tmp_path, capsys):
        empty = tmp_path / "empty"
        empty.mkdir()
        assert main(["stats", "--corpus", str(empty)]) == 2
        assert "no corpus files found" in capsys.readouterr().err

    def test_bad_file_is_named_in_diagnostic(self, tmp_path, capsys):
        bad = tmp_path / "bad.txt"
        bad.write_text("stray ]] here", encoding="utf-8")
        assert main(["stats", "--corpus", str(bad)]) == 2
        assert "bad.txt" in capsys.readouterr().err


class TestSplit:
    def test_writes_three_files(self, toy_corpus, tmp_path, capsys):
        out = tmp_path / "splits"
        code = main(["split", "--corpus", str(toy_corpus), "--out", str(out),
                     "--seed", "1", "--train-frac", "0.5", "--dev-frac", "0.25",
                     "--test-frac", "0.25"])
        assert code == 0
        texts = [(out / f"{n}.txt").read_text(encoding="utf-8")
                 for n in ("train", "dev", "test")]
        assert sum(t.count("\n") for t in texts) == 6

    def test_deterministic(self, toy_corpus, tmp_path):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        for out in (out_a, out_b):
            main(["split", "--corpus", str(toy_corpus), "--out", str(out),
                  "--seed", "11"])
        for name in ("train.txt", "dev.txt", "test.txt"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()


class TestTrainBigrams:
    def test_hand_checkable_counts(self, toy_corpus, tmp_path, capsys):
        out = tmp_path / "bigrams.tsv"
        code = main(["train-bigrams", "--corpus", str(toy_corpus),
                     "--out", str(out)])
        assert code == 0
        model = load_bigram_model(out.read_text(encoding="utf-8"))
        # 'l.' occurs twice, always in abbreviation position
        assert model.counts_a.get("l") == 2
        assert "l" not in model.counts_b
        # 'v' occurs three times, never in abbreviation position
        assert model.counts_b.get("v") == 3
        assert "v" not in model.counts_a

    def test_missing_corpus_is_training_error(self, tmp_path, capsys):
        code = main(["train-bigrams", "--corpus", str(tmp_path / "nope.txt"),
                     "--out", str(tmp_path / "m.tsv")])
        assert code == 3


class TestTrainClassifier:
    def test_writes_model_and_report(self, toy_corpus, tmp_path, capsys):
        out = tmp_path / "clf"
        code = main(["train-classifier", "--train", str(toy_corpus),
                     "--dev", str(toy_corpus), "--out", str(out), "--seed", "1"])
        assert code == 0
        assert (out / "classifier.txt").exists()
        assert (out / "train_report.json").exists()

    def test_seed_list_report_structure(self, toy_corpus, tmp_path, capsys):
        out = tmp_path / "clf"
        code = main(["train-classifier", "--train", str(toy_corpus),
                     "--dev", str(toy_corpus), "--test", str(toy_corpus),
                     "--out", str(out), "--seeds", "1,2,3"])
        assert code == 0
        report = (out / "train_report.json").read_text(encoding="utf-8")
        assert '"seeds": [\n    1,\n    2,\n    3\n  ]' in report
        for seed in (1, 2, 3):
            assert (out / f"classifier-seed{seed}.txt").exists()

    def test_deterministic_report(self, toy_corpus, tmp_path, capsys):
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            main(["train-classifier", "--train", str(toy_corpus),
                  "--dev", str(toy_corpus), "--out", str(out), "--seed", "5"])
            outs.append((out / "train_report.json").read_bytes())
        assert outs[0] == outs[1]

    def test_missing_split_is_training_error(self, tmp_path, capsys):
        code = main(["train-classifier", "--train", str(tmp_path / "no.txt"),
                     "--dev", str(tmp_path / "no.txt"),
                     "--out", str(tmp_path / "out")])
        assert code == 3


class TestIdentify:
    def test_dict_method_writes_flags_and_report(self, toy_corpus, tmp_path,
                                                 data_dir, capsys):
        flags = tmp_path / "flags.tsv"
        report = tmp_path / "report.tsv"
        code = main(["identify", "--corpus", str(toy_corpus), "--method", "dict",
                     "--dict", str(data_dir / "words.txt"),
                     "--out", str(flags), "--report", str(report)])
        assert code == 0
        lines = flags.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "doc_id\tsent_index\tposition\traw\tflag"
        flagged = {line.split("\t")[3] for line in lines[1:]
                   if line.endswith("\t1")}
        # 'prof' is in the word list, so 'prof.' is missed; the rest hit
        assert "prof." not in flagged
        assert {"l.", "dr."} <= flagged
        assert report.exists()

    def test_bigram_method_with_threshold_override(self, toy_corpus, tmp_path,
                                                   capsys):
        model = tmp_path / "bigrams.tsv"
        main(["train-bigrams", "--corpus", str(toy_corpus), "--out", str(model),
              "--permissive"])
        flags = tmp_path / "flags.tsv"
        code = main(["identify", "--corpus", str(toy_corpus), "--method", "bigram",
                     "--model", str(model), "--threshold", "0.9",
                     "--out", str(flags)])
        assert code == 0

    def test_union_method(self, toy_corpus, tmp_path, data_dir, capsys):
        model = tmp_path / "bigrams.tsv"
        main(["train-bigrams", "--corpus", str(toy_corpus), "--out", str(model),
              "--permissive"])
        flags = tmp_path / "flags.tsv"
        code = main(["identify", "--corpus", str(toy_corpus),
                     "--method", "bigram+dict", "--model", str(model),
                     "--dict", str(data_dir / "words.txt"), "--out", str(flags)])
        assert code == 0

    def test_remote_without_bridge_is_provider_error(self, toy_corpus, tmp_path,
                                                     capsys):
        code = main(["identify", "--corpus", str(toy_corpus), "--method", "remote",
                     "--endpoint", "http://127.0.0.1:1",
                     "--out", str(tmp_path / "f.tsv")])
        assert code == 4

    def test_classifier_method_with_trained_model(self, toy_corpus, tmp_path,
                                                  capsys):
        clf_dir = tmp_path / "clf"
        main(["train-classifier", "--train", str(toy_corpus),
              "--dev", str(toy_corpus), "--out", str(clf_dir), "--seed", "3"])
        flags = tmp_path / "flags.tsv"
        report = tmp_path / "report.tsv"
        code = main(["identify", "--corpus", str(toy_corpus),
                     "--method", "classifier",
                     "--model", str(clf_dir / "classifier.txt"),
                     "--out", str(flags), "--report", str(report)])
        assert code == 0
        assert report.exists()

    def test_missing_method_inputs_are_input_errors(self, toy_corpus, tmp_path,
                                                    capsys):
        assert main(["identify", "--corpus", str(toy_corpus),
                     "--method", "dict", "--out", str(tmp_path / "f.tsv")]) == 2
        assert main(["identify", "--corpus", str(toy_corpus),
                     "--method", "bigram", "--out", str(tmp_path / "f.tsv")]) == 2


class TestExpand:
    def test_gold_flags_with_ngram_provider(self, toy_corpus, tmp_path, capsys):
        out = tmp_path / "expanded"
        code = main(["expand", "--corpus", str(toy_corpus / "bio1.txt"),
                     "--provider", "ngram",
                     "--provider-corpus", str(toy_corpus),
                     "--out", str(out)])
        assert code == 0
        log = (out / "expansion_log.tsv").read_text(encoding="utf-8")
        assert "l.\texpanded\tleta" in log
        assert (out / "bio1.txt").exists()
        assert (out / "bio1.conllu").exists()
        printed = capsys.readouterr().out
        assert "expanded" in printed and "flagged" in printed

    def test_zero_flagged_tokens_yield_identical_output(self, tmp_path, capsys):
        src = tmp_path / "plain.txt"
        src.write_text("Brez okrajšav tukaj.\n", encoding="utf-8")
        out = tmp_path / "expanded"
        code = main(["expand", "--corpus", str(src), "--provider", "ngram",
                     "--provider-corpus", str(src), "--out", str(out)])
        assert code == 0
        assert (out / "plain.txt").read_text(encoding="utf-8") == \
            "Brez okrajšav tukaj.\n"
        log = (out / "expansion_log.tsv").read_text(encoding="utf-8")
        assert len(log.splitlines()) == 1  # header only

    def test_http_provider_malformed_json_is_provider_error(
            self, toy_corpus, tmp_path, fixture_server, capsys):
        endpoint, set_response = fixture_server
        set_response("/fill-mask", b"{broken", raw=True)
        code = main(["expand", "--corpus", str(toy_corpus / "bio1.txt"),
                     "--provider", "http", "--endpoint", endpoint,
                     "--out", str(tmp_path / "x")])
        assert code == 4


class TestEval:
    def test_gold_vs_gold_identification_is_all_100(self, toy_corpus, tmp_path,
                                                    data_dir, capsys):
        from abbrkit.cli import flags_tsv
        from abbrkit.identifiers import IdentificationResult
        from abbrkit.tokenization import gold_labeled_tokens

        docs = [corpus.parse_markup_text(
            (toy_corpus / name).read_text(encoding="utf-8"),
            doc_id=name.removesuffix(".txt"))
            for name in ("bio1.txt", "bio2.txt")]
        gold = [flag for d in docs for _, flag in gold_labeled_tokens(d)]
        pred_file = tmp_path / "pred.tsv"
        pred_file.write_text(
            flags_tsv(docs, IdentificationResult(tuple(gold), "gold")),
            encoding="utf-8")
        out = tmp_path / "report.tsv"
        code = main(["eval-ident", "--pred", str(pred_file),
                     "--gold", str(toy_corpus), "--out", str(out)])
        assert code == 0
        assert "100.00\t100.00\t100.00" in out.read_text(encoding="utf-8")

    def test_ner_gold_vs_gold(self, data_dir, tmp_path, capsys):
        out = tmp_path / "ner.tsv"
        code = main(["eval-ner", "--pred", str(data_dir / "bio_abbr.conllu"),
                     "--gold", str(data_dir / "bio_abbr.conllu"),
                     "--out", str(out)])
        assert code == 0
        text = out.read_text(encoding="utf-8")
        assert "macro_avg\t100.00\t100.00\t100.00" in text

    def test_unaligned_corpora_exit_code(self, data_dir, tmp_path, capsys):
        shorter = tmp_path / "short.conllu"
        text = (data_dir / "bio_abbr.conllu").read_text(encoding="utf-8")
        first_block = text.split("\n\n")[0] + "\n"
        shorter.write_text(first_block, encoding="utf-8")
        code = main(["eval-ner", "--pred", str(shorter),
                     "--gold", str(data_dir / "bio_abbr.conllu")])
        assert code == 2
        assert "unmatched sentence keys" in capsys.readouterr().err


class TestConfigPrecedence:
    def test_config_supplies_and_flags_override(self, toy_corpus, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text("seed = 1\ntrain_frac = 0.5\ndev_frac = 0.25\n"
                          "test_frac = 0.25\n", encoding="utf-8")
        out_config = tmp_path / "a.tsv"
        main(["stats", "--corpus", str(toy_corpus), "--config", str(config),
              "--out", str(out_config)])
        out_override = tmp_path / "b.tsv"
        main(["stats", "--corpus", str(toy_corpus), "--config", str(config),
              "--train-frac", "0.7", "--dev-frac", "0.1", "--test-frac", "0.2",
              "--out", str(out_override)])

        def sizes(path):
            rows = path.read_text(encoding="utf-8").splitlines()[1:]
            return [int(r.split("\t")[1]) for r in rows]

        assert sizes(out_config)[:3] == [3, 2, 1]
        assert sizes(out_override)[:3] == [4, 1, 1]

    def test_bad_config_line(self, toy_corpus, tmp_path, capsys):
        config = tmp_path / "run.cfg"
        config.write_text("not a pair\n", encoding="utf-8")
        assert main(["stats", "--corpus", str(toy_corpus),
                     "--config", str(config)]) == 2
