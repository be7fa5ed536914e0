"""Command-line pipelines: stats, splits, training, identification,
expansion and evaluation.

Exit codes: 0 success, 2 input/parse error, 3 training error, 4
provider/bridge error.  Every run is deterministic for a fixed ``--seed``
and overwrites its outputs atomically with identical bytes on identical
inputs.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from dataclasses import replace
from pathlib import Path

from . import classifier, corpus, evaluation, expansion, identifiers, tokenization

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_TRAIN = 3
EXIT_PROVIDER = 4

CONFIG_HELP = (
    "flat key=value file (one per line, '#' comments); keys are the long "
    "option names with '-' replaced by '_'; precedence: flags > config > defaults"
)


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# option resolution (flags > config file > defaults)
# ---------------------------------------------------------------------------

def load_config(path: str | None) -> dict[str, str]:
    if path is None:
        return {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(EXIT_INPUT, f"cannot read config {path}: {exc}")
    values: dict[str, str] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise CliError(EXIT_INPUT, f"{path}:{line_no}: expected key=value")
        key, _, value = line.partition("=")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


class Options:
    def __init__(self, args: argparse.Namespace, defaults: dict):
        self._args = vars(args)
        self._config = load_config(self._args.get("config"))
        self._defaults = defaults

    def get(self, name: str):
        value = self._args.get(name)
        if value is not None:
            return value
        if name in self._config:
            return self._config[name]
        return self._defaults.get(name)

    def get_float(self, name: str) -> float | None:
        value = self.get(name)
        return None if value is None else float(value)

    def get_int(self, name: str) -> int | None:
        value = self.get(name)
        return None if value is None else int(value)

    def get_bool(self, name: str) -> bool:
        value = self.get(name)
        if isinstance(value, bool) or value is None:
            return bool(value)
        return str(value).lower() in ("1", "true", "yes", "on")

    def get_paths(self, name: str) -> list[str]:
        value = self.get(name)
        if value is None:
            return []
        if isinstance(value, list):
            return value
        return str(value).split(",")


# ---------------------------------------------------------------------------
# corpus loading and output helpers
# ---------------------------------------------------------------------------

def _corpus_files(paths: list[str]) -> list[Path]:
    files: list[Path] = []
    for raw in paths:
        path = Path(raw)
        if path.is_dir():
            found = sorted(p for p in path.iterdir()
                           if p.suffix in (".txt", ".conllu"))
            files.extend(found)
        elif path.exists():
            files.append(path)
        else:
            raise CliError(EXIT_INPUT, f"{path}: no such file or directory")
    if not files:
        raise CliError(EXIT_INPUT, "no corpus files found")
    return files


def load_documents(paths: list[str], stream: str = "abbreviated"
                   ) -> list[corpus.Document]:
    docs: list[corpus.Document] = []
    for path in _corpus_files(paths):
        text = path.read_text(encoding="utf-8")
        try:
            if path.suffix == ".conllu":
                docs.extend(corpus.parse_conllu_corpus(text, stream=stream))
            else:
                docs.append(corpus.parse_markup_text(text, doc_id=path.stem))
        except corpus.MalformedMarkup as exc:
            raise CliError(EXIT_INPUT, f"{path}: {exc}")
        except (corpus.MalformedConllu, corpus.UnknownIobTag) as exc:
            raise CliError(EXIT_INPUT, f"{path}:{exc.line_no}: {exc}")
    return docs


def write_atomic(path: str | Path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(data: bytes, out: str | None) -> None:
    if out is None:
        sys.stdout.write(data.decode("utf-8"))
    else:
        write_atomic(out, data)


def sentence_markup(sent: corpus.Sentence) -> str:
    parts = []
    for tok in sent.tokens:
        if tok.is_abbr and tok.gold_expansion is not None:
            parts.append(f"[[{tok.surface}]](({tok.gold_expansion}))")
        else:
            parts.append(tok.surface)
        parts.append(tok.trailing)
    return "".join(parts).rstrip()


def _split_spec(opts: Options) -> corpus.SplitSpec:
    try:
        return corpus.SplitSpec(
            opts.get("train_frac"), opts.get("dev_frac"), opts.get("test_frac"),
            seed=opts.get_int("seed"), unit=opts.get("unit"))
    except ValueError as exc:
        raise CliError(EXIT_INPUT, str(exc))


SPLIT_DEFAULTS = {"train_frac": "0.7", "dev_frac": "0.1", "test_frac": "0.2",
                  "seed": 0, "unit": "sentence"}


# ---------------------------------------------------------------------------
# flag files (identification output)
# ---------------------------------------------------------------------------

FLAGS_HEADER = "doc_id\tsent_index\tposition\traw\tflag"


def flags_tsv(docs, result: identifiers.IdentificationResult) -> str:
    lines = [FLAGS_HEADER]
    i = 0
    for doc in docs:
        for token in tokenization.document_dirty_tokens(doc):
            doc_id, sent_index, position = token.sentence_ref
            flag = 1 if result.decisions[i] else 0
            lines.append(f"{doc_id}\t{sent_index}\t{position}\t{token.raw}\t{flag}")
            i += 1
    return "\n".join(lines) + "\n"


def read_flags(path: str) -> tuple[list[tuple[str, int, int]], list[bool]]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(EXIT_INPUT, f"cannot read flags {path}: {exc}")
    lines = text.splitlines()
    if not lines or lines[0] != FLAGS_HEADER:
        raise CliError(EXIT_INPUT, f"{path}:1: not a flags file")
    keys = []
    flags = []
    for line_no, line in enumerate(lines[1:], start=2):
        cols = line.split("\t")
        if len(cols) != 5:
            raise CliError(EXIT_INPUT, f"{path}:{line_no}: expected 5 columns")
        keys.append((cols[0], int(cols[1]), int(cols[2])))
        flags.append(cols[4] == "1")
    return keys, flags


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_stats(opts: Options) -> int:
    docs = load_documents(opts.get_paths("corpus"))
    sentences = [s for d in docs for s in d.sentences]
    if not sentences:
        raise CliError(EXIT_INPUT, "corpus contains no sentences")
    spec = _split_spec(opts)
    train, dev, test = corpus.split_corpus(docs, spec)
    rows = corpus.compute_stats({"train": train, "dev": dev, "test": test},
                                casefold=opts.get_bool("fold_case"))
    _emit(corpus.stats_tsv(rows).encode("utf-8"), opts.get("out"))
    return EXIT_OK


def cmd_split(opts: Options) -> int:
    docs = load_documents(opts.get_paths("corpus"))
    spec = _split_spec(opts)
    try:
        parts = corpus.split_corpus(docs, spec)
    except corpus.EmptyCorpus as exc:
        raise CliError(EXIT_INPUT, str(exc))
    out_dir = Path(opts.get("out") or ".")
    for name, sentences in zip(("train", "dev", "test"), parts):
        text = "".join(sentence_markup(s) + "\n" for s in sentences)
        write_atomic(out_dir / f"{name}.txt", text.encode("utf-8"))
    print(f"wrote {len(parts[0])}/{len(parts[1])}/{len(parts[2])} sentences "
          f"to {out_dir}")
    return EXIT_OK


def cmd_train_bigrams(opts: Options) -> int:
    try:
        docs = load_documents(opts.get_paths("corpus"))
        text = "\n".join(d.raw_text for d in docs)
        model = identifiers.train_bigram(
            identifiers.bigram_corpus_tokens(text),
            threshold=opts.get_float("threshold"),
            require_both=not opts.get_bool("permissive"),
            fold_case=opts.get_bool("fold_case"))
    except (CliError, corpus.EmptyCorpus) as exc:
        message = str(exc)
        raise CliError(EXIT_TRAIN, message)
    out = opts.get("out")
    if out is None:
        raise CliError(EXIT_INPUT, "train-bigrams needs --out")
    write_atomic(out, identifiers.save_bigram_model(model).encode("utf-8"))
    print(f"trained bigram model with {len(set(model.counts_a) | set(model.counts_b))}"
          f" types -> {out}")
    return EXIT_OK


def _labeled(paths: list[str]) -> list[tuple[tokenization.DirtyToken, bool]]:
    docs = load_documents(paths)
    labeled = []
    for doc in docs:
        labeled.extend(tokenization.gold_labeled_tokens(doc))
    return labeled


def cmd_train_classifier(opts: Options) -> int:
    out_dir = Path(opts.get("out") or ".")
    hp = classifier.Hyperparams(
        epochs=opts.get_int("epochs"), learning_rate=opts.get_float("lr"),
        l2=opts.get_float("l2"), seed=opts.get_int("seed"))
    try:
        train = _labeled(opts.get_paths("train"))
        dev = _labeled(opts.get_paths("dev"))
        test_paths = opts.get_paths("test")
        test = _labeled(test_paths) if test_paths else None
        seeds = [int(s) for s in str(opts.get("seeds")).split(",")] \
            if opts.get("seeds") else [hp.seed]
        runs = []
        for seed in seeds:
            model, report = classifier.train_scorer(train, dev,
                                                    replace(hp, seed=seed))
            run = report.runs[0]
            if test is not None:
                run = replace(run, test=classifier.evaluate_scorer(model, test))
            runs.append(run)
            name = f"classifier-seed{seed}.txt" if len(seeds) > 1 else "classifier.txt"
            write_atomic(out_dir / name,
                         classifier.save_scorer_model(model).encode("utf-8"))
        report = classifier.TrainReport(runs=tuple(runs))
    except (CliError, classifier.DegenerateTraining, corpus.EmptyCorpus) as exc:
        raise CliError(EXIT_TRAIN, str(exc))
    write_atomic(out_dir / "train_report.json", report.to_json().encode("utf-8"))
    summary = report.test_summary or report.dev_summary
    mean = summary["mean"]
    print(f"seeds {list(report.seeds)}: "
          f"P {mean['precision']:.2f} R {mean['recall']:.2f} F1 {mean['f1']:.2f}")
    return EXIT_OK


def _build_result(opts: Options, docs) -> identifiers.IdentificationResult:
    method = opts.get("method")
    stream = [t for d in docs for t in tokenization.document_dirty_tokens(d)]

    def dict_result():
        dict_path = opts.get("dict")
        if dict_path is None:
            raise CliError(EXIT_INPUT, f"method {method} needs --dict")
        try:
            text = Path(dict_path).read_text(encoding="utf-8")
        except OSError as exc:
            raise CliError(EXIT_INPUT, f"cannot read dictionary: {exc}")
        resource = identifiers.load_dictionary(
            text, name=Path(dict_path).stem, case_mode=opts.get("case_mode"))
        return identifiers.dict_identify(stream, resource)

    def bigram_result():
        model_path = opts.get("model")
        if model_path is None:
            raise CliError(EXIT_INPUT, f"method {method} needs --model")
        try:
            model = identifiers.load_bigram_model(
                Path(model_path).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise CliError(EXIT_INPUT, f"cannot load bigram model: {exc}")
        threshold = opts.get_float("threshold")
        if threshold is not None:
            model = replace(model, threshold=threshold)
        return identifiers.bigram_identify(stream, model)

    if method == "dict":
        return dict_result()
    if method == "bigram":
        return bigram_result()
    if method == "bigram+dict":
        return identifiers.union_identify([bigram_result(), dict_result()])
    if method == "classifier":
        model_path = opts.get("model")
        if model_path is None:
            raise CliError(EXIT_INPUT, "method classifier needs --model")
        try:
            model = classifier.load_scorer_model(
                Path(model_path).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise CliError(EXIT_INPUT, f"cannot load classifier model: {exc}")
        return classifier.scorer_identify(stream, model)
    if method == "remote":
        endpoint = opts.get("endpoint")
        if endpoint is None:
            raise CliError(EXIT_INPUT, "method remote needs --endpoint")
        scorer = classifier.RemoteScorer(endpoint)
        try:
            return classifier.scorer_identify(stream, scorer, method_tag="remote")
        except (classifier.BridgeUnavailable,
                classifier.BridgeProtocolError) as exc:
            raise CliError(EXIT_PROVIDER, str(exc))
    raise CliError(EXIT_INPUT, f"unknown method {method!r}")


def cmd_identify(opts: Options) -> int:
    docs = load_documents(opts.get_paths("corpus"))
    result = _build_result(opts, docs)
    _emit(flags_tsv(docs, result).encode("utf-8"), opts.get("out"))
    gold = [flag for d in docs for _, flag in tokenization.gold_labeled_tokens(d)]
    if any(gold):
        prf = evaluation.score_identification(result, gold)
        report = evaluation.emit_report(prf, opts.get("format"))
        _emit(report, opts.get("report"))
    return EXIT_OK


def _provider(opts: Options):
    kind = opts.get("provider")
    if kind == "ngram":
        paths = opts.get_paths("provider_corpus")
        if not paths:
            raise CliError(EXIT_INPUT, "provider ngram needs --provider-corpus")
        docs = load_documents(paths, stream="expanded")
        expanded = []
        extra_vocab: set[str] = set()
        for doc in docs:
            for sent in doc.sentences:
                for tok in sent.tokens:
                    if tok.gold_expansion:
                        extra_vocab.update(tok.gold_expansion.split())
            if any(t.is_abbr and t.gold_expansion for s in doc.sentences
                   for t in s.tokens):
                doc = evaluation.substitute_gold_expansions(doc)
            expanded.append(doc)
        return expansion.train_ngram_model(
            expansion.ngram_sentences_from_documents(expanded),
            extra_vocab=extra_vocab)
    if kind == "http":
        endpoint = opts.get("endpoint")
        if endpoint is None:
            raise CliError(EXIT_INPUT, "provider http needs --endpoint")
        return expansion.HttpFillMaskProvider(endpoint)
    raise CliError(EXIT_INPUT, f"unknown provider {kind!r}")


def cmd_expand(opts: Options) -> int:
    docs = load_documents(opts.get_paths("corpus"))
    flags_path = opts.get("flags")
    if flags_path is not None:
        keys, flags = read_flags(flags_path)
        stream_keys = [t.sentence_ref for d in docs
                       for t in tokenization.document_dirty_tokens(d)]
        if keys != stream_keys:
            raise CliError(EXIT_INPUT,
                           "flags file does not align with the corpus stream")
    else:
        flags = [flag for d in docs
                 for _, flag in tokenization.gold_labeled_tokens(d)]
    policy = expansion.ExpansionPolicy(top_k=opts.get_int("top_k"))
    provider = _provider(opts)
    out_dir = Path(opts.get("out") or ".")
    offset = 0
    expanded_docs = []
    records = []
    try:
        for doc in docs:
            n = len(tokenization.document_dirty_tokens(doc))
            doc_flags = identifiers.IdentificationResult(
                tuple(flags[offset:offset + n]), "flags")
            offset += n
            new_doc, log = expansion.expand_document(
                doc, doc_flags, policy, provider,
                cascade=opts.get_bool("cascade"))
            expanded_docs.append(new_doc)
            records.extend(log.records)
    except (expansion.ProviderUnavailable, expansion.ProviderProtocolError,
            expansion.EmptyVocabulary) as exc:
        raise CliError(EXIT_PROVIDER, str(exc))
    log = expansion.ExpansionLog(records=tuple(records))
    for doc in expanded_docs:
        text = "".join(sentence_markup(s) + "\n" for s in doc.sentences)
        write_atomic(out_dir / f"{doc.doc_id}.txt", text.encode("utf-8"))
        write_atomic(out_dir / f"{doc.doc_id}.conllu",
                     corpus.serialize_conllu(doc).encode("utf-8"))
    write_atomic(out_dir / "expansion_log.tsv", log.to_tsv().encode("utf-8"))
    print(f"expanded {log.n_expanded} of {log.n_expanded + log.n_kept} "
          f"flagged tokens (kept {log.n_kept})")
    return EXIT_OK


def cmd_eval_ident(opts: Options) -> int:
    docs = load_documents(opts.get_paths("gold"))
    keys, flags = read_flags(opts.get("pred"))
    labeled = [pair for d in docs for pair in tokenization.gold_labeled_tokens(d)]
    stream_keys = [tok.sentence_ref for tok, _ in labeled]
    if keys != stream_keys:
        raise CliError(EXIT_INPUT,
                       "prediction flags do not align with the gold corpus")
    pred = identifiers.IdentificationResult(tuple(flags), "pred")
    prf = evaluation.score_identification(pred, [flag for _, flag in labeled])
    _emit(evaluation.emit_report(prf, opts.get("format")), opts.get("out"))
    return EXIT_OK


def cmd_eval_ner(opts: Options) -> int:
    pred_docs = load_documents(opts.get_paths("pred"))
    gold_docs = load_documents(opts.get_paths("gold"))
    try:
        report = evaluation.score_ner(pred_docs, gold_docs)
    except evaluation.UnalignedCorpora as exc:
        raise CliError(EXIT_INPUT, str(exc))
    _emit(evaluation.emit_report(report, opts.get("format")), opts.get("out"))
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="abbrkit",
        description="abbreviation identification and expansion pipelines")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, configure):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help=CONFIG_HELP)
        configure(p)
        return p

    corpus_help = "markup (.txt) or CoNLL-U (.conllu) files or directories"

    def split_opts(p):
        p.add_argument("--train-frac", dest="train_frac",
                       help="training fraction (default 0.7)")
        p.add_argument("--dev-frac", dest="dev_frac",
                       help="development fraction (default 0.1)")
        p.add_argument("--test-frac", dest="test_frac",
                       help="test fraction (default 0.2)")
        p.add_argument("--seed", type=int,
                       help="shuffle seed; the only source of randomness (default 0)")
        p.add_argument("--unit", choices=["sentence", "document"],
                       help="split unit (default sentence)")

    def p_stats(p):
        p.add_argument("--corpus", nargs="+", required=True, help=corpus_help)
        p.add_argument("--out", help="stats TSV path (default stdout)")
        p.add_argument("--fold-case", dest="fold_case", action="store_const",
                       const=True, help="casefold abbreviation types")
        split_opts(p)

    def p_split(p):
        p.add_argument("--corpus", nargs="+", required=True, help=corpus_help)
        p.add_argument("--out", required=True,
                       help="directory for train.txt/dev.txt/test.txt")
        split_opts(p)

    def p_train_bigrams(p):
        p.add_argument("--corpus", nargs="+", required=True,
                       help="training corpus; " + corpus_help)
        p.add_argument("--out", required=True, help="model TSV path")
        p.add_argument("--threshold", type=float,
                       help="decision threshold (default 0.8)")
        p.add_argument("--permissive", action="store_const", const=True,
                       help="score types seen in only one of the two lists")
        p.add_argument("--fold-case", dest="fold_case", action="store_const",
                       const=True, help="casefold count keys")

    def p_train_classifier(p):
        p.add_argument("--train", nargs="+", required=True,
                       help="gold training corpus; " + corpus_help)
        p.add_argument("--dev", nargs="+", required=True,
                       help="development corpus for per-epoch model selection")
        p.add_argument("--test", nargs="+",
                       help="optional held-out corpus for the report")
        p.add_argument("--out", required=True,
                       help="directory for model file(s) and train_report.json")
        p.add_argument("--seed", type=int, help="training seed (default 0)")
        p.add_argument("--seeds",
                       help="comma-separated seed list for the mean/std protocol")
        p.add_argument("--epochs", type=int, help="SGD epochs (default 5)")
        p.add_argument("--lr", type=float, help="learning rate (default 0.1)")
        p.add_argument("--l2", type=float,
                       help="L2 regularization strength (default 1e-4)")

    def p_identify(p):
        p.add_argument("--corpus", nargs="+", required=True, help=corpus_help)
        p.add_argument("--method", choices=["dict", "bigram", "bigram+dict",
                                            "classifier", "remote"],
                       help="identification method (default bigram)")
        p.add_argument("--dict", help="word list for the dictionary method")
        p.add_argument("--model",
                       help="bigram model TSV or classifier model file")
        p.add_argument("--endpoint",
                       help="bridge base URL for the remote method")
        p.add_argument("--threshold", type=float,
                       help="override the bigram model's threshold")
        p.add_argument("--case-mode", dest="case_mode",
                       choices=["exact", "lower"],
                       help="dictionary lookup mode (default exact)")
        p.add_argument("--out", help="flags TSV path (default stdout)")
        p.add_argument("--report",
                       help="score report path when the corpus carries gold flags")
        p.add_argument("--format", choices=["tsv", "json", "markdown"],
                       help="report format (default tsv)")

    def p_expand(p):
        p.add_argument("--corpus", nargs="+", required=True, help=corpus_help)
        p.add_argument("--flags",
                       help="flags TSV from identify (default: gold flags)")
        p.add_argument("--provider", choices=["ngram", "http"],
                       help="fill-mask provider (default ngram)")
        p.add_argument("--provider-corpus", dest="provider_corpus", nargs="+",
                       help="expanded-stream corpus to train the ngram provider on")
        p.add_argument("--endpoint", help="bridge base URL for the http provider")
        p.add_argument("--top-k", dest="top_k", type=int,
                       help="candidates inspected per slot (default 5)")
        p.add_argument("--cascade", action="store_const", const=True,
                       help="mask against already-expanded context instead of "
                            "the original sentence")
        p.add_argument("--out", required=True,
                       help="directory for expanded corpora and expansion_log.tsv")

    def p_eval_ident(p):
        p.add_argument("--pred", required=True, help="flags TSV from identify")
        p.add_argument("--gold", nargs="+", required=True,
                       help="gold corpus; " + corpus_help)
        p.add_argument("--out", help="report path (default stdout)")
        p.add_argument("--format", choices=["tsv", "json", "markdown"],
                       help="report format (default tsv)")

    def p_eval_ner(p):
        p.add_argument("--pred", nargs="+", required=True,
                       help="predicted-IOB CoNLL-U files")
        p.add_argument("--gold", nargs="+", required=True,
                       help="gold-IOB CoNLL-U files")
        p.add_argument("--out", help="report path (default stdout)")
        p.add_argument("--format", choices=["tsv", "json", "markdown"],
                       help="report format (default tsv)")

    add("stats", "corpus statistics per split", p_stats)
    add("split", "write train/dev/test files", p_split)
    add("train-bigrams", "train the corpus bigram identifier", p_train_bigrams)
    add("train-classifier", "train the native token classifier", p_train_classifier)
    add("identify", "flag abbreviation candidates", p_identify)
    add("expand", "mask-and-fill expansion of flagged tokens", p_expand)
    add("eval-ident", "score identification flags against gold", p_eval_ident)
    add("eval-ner", "span-level NER scoring of IOB files", p_eval_ner)
    return parser


DEFAULTS: dict[str, dict] = {
    "stats": {**SPLIT_DEFAULTS, "fold_case": False},
    "split": SPLIT_DEFAULTS,
    "train-bigrams": {"threshold": identifiers.DEFAULT_THRESHOLD,
                      "permissive": False, "fold_case": False},
    "train-classifier": {"epochs": 5, "lr": 0.1, "l2": 1e-4, "seed": 0},
    "identify": {"method": "bigram", "case_mode": "exact", "format": "tsv"},
    "expand": {"provider": "ngram", "top_k": 5, "cascade": False},
    "eval-ident": {"format": "tsv"},
    "eval-ner": {"format": "tsv"},
}

COMMANDS = {
    "stats": cmd_stats,
    "split": cmd_split,
    "train-bigrams": cmd_train_bigrams,
    "train-classifier": cmd_train_classifier,
    "identify": cmd_identify,
    "expand": cmd_expand,
    "eval-ident": cmd_eval_ident,
    "eval-ner": cmd_eval_ner,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        opts = Options(args, DEFAULTS[args.command])
        return COMMANDS[args.command](opts)
    except CliError as exc:
        print(f"abbrkit: {exc}", file=sys.stderr)
        return exc.code
    except evaluation.MisalignedStreams as exc:
        print(f"abbrkit: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
