"""Train / predict / evaluate / analyze building blocks shared by the CLI and tests."""

from __future__ import annotations

import json
from collections import defaultdict
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .codec import ValidityReport, decode_with_chunks, encode, project, validity_report
from .core import ClassTokenList, Polarity, Span, Subtask, TargetSequence, make_sentence
from .data import (
    WHITESPACE,
    DatasetRecord,
    TokenizerConfig,
    load_dataset,
    to_word_span,
    train_bpe,
)
from .eval import EvalReport, score_conditioned, score_corpus
from .model import PointerSeq2Seq, TrainResult, Vocab, generate, load_checkpoint, save_checkpoint, train
from .runconfig import MULTI, ConfigError, RunConfig

CHECKPOINT_NAME = "model.ckpt"
TRACE_NAME = "loss_trace.json"


def dump_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def aspects_of(rec: DatasetRecord) -> List[Span]:
    return sorted({a.aspect for a in rec.annotations})


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------


def tokenizer_for(cfg: RunConfig, train_path) -> TokenizerConfig:
    base = TokenizerConfig(lowercase=cfg.lowercase)
    if cfg.tokenizer == "whitespace":
        return base
    merges = train_bpe(load_dataset(train_path, base), cfg.bpe_merges)
    return TokenizerConfig("bpe", merges, cfg.lowercase)


def build_examples(records: Sequence[DatasetRecord], cfg: RunConfig, classes: ClassTokenList):
    """``(examples, weights)`` for teacher forcing under ``cfg``'s subtask(s)."""
    examples, weights = [], []
    for task, weight in zip(cfg.tasks, cfg.task_weights if cfg.multitask else [1.0]):
        for rec in records:
            if not rec.labeled:
                raise ConfigError("training data must be labeled")
            given_list = aspects_of(rec) if task.needs_aspect else [None]
            for given in given_list:
                seq = encode(task, rec.sentence, rec.annotations, given, classes, cfg.multitask)
                examples.append((rec.sentence, seq.indexes))
                weights.append(weight)
    return examples, weights


def run_training(cfg: RunConfig, log_every: int = 0) -> Tuple[PointerSeq2Seq, TrainResult]:
    cfg.validate()
    tok = tokenizer_for(cfg, cfg.train)
    records = load_dataset(cfg.train, tok)
    classes = cfg.classes()
    vocab = Vocab.build((t for r in records for t in r.sentence.tokens), classes.tokens)
    model = PointerSeq2Seq(cfg.model_config(len(vocab)), vocab, classes)
    examples, weights = build_examples(records, cfg, classes)
    result = train(model, examples, cfg.optimizer_config(), weights if cfg.multitask else None, log_every)

    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    meta = {
        "subtask": cfg.subtask,
        "tags": cfg.tags if cfg.multitask else [],
        "tokenizer": tok.to_dict(),
        "max_len": cfg.max_len,
    }
    save_checkpoint(model, out / CHECKPOINT_NAME, meta)
    dump_json({"losses": result.losses, "epoch_losses": result.epoch_losses, "lrs": result.lrs}, out / TRACE_NAME)
    dump_json(cfg.to_dict(), out / "config.json")
    return model, result


# ---------------------------------------------------------------------------
# prediction
# ---------------------------------------------------------------------------


def tuple_to_json(item):
    if isinstance(item, Polarity):
        return item.value
    if isinstance(item, tuple):
        return [tuple_to_json(v) for v in item]
    return item


def tuple_from_json(item):
    if isinstance(item, str):
        return Polarity(item)
    if len(item) == 2 and all(isinstance(v, int) for v in item):
        return Span(*item)
    return tuple(tuple_from_json(v) for v in item)


def _words_tuple(sentence, item):
    if isinstance(item, Span):
        return to_word_span(sentence, item)
    if isinstance(item, tuple):
        return tuple(_words_tuple(sentence, v) for v in item)
    return item


def predict_records(
    model: PointerSeq2Seq,
    records: Sequence[DatasetRecord],
    subtask: str,
    tags: Sequence[str] = (),
    beam: int = 1,
    max_len: int = 64,
) -> List[dict]:
    """One prediction line per (sentence, task[, given aspect])."""
    multitask = subtask == MULTI
    tasks = [Subtask.parse(t) for t in tags] if multitask else [Subtask.parse(subtask)]
    lines = []
    for i, rec in enumerate(records):
        sent = rec.sentence
        for task in tasks:
            if task.needs_aspect and not rec.labeled:
                raise ConfigError(f"{task.value} needs gold aspects but sentence {i} has no 'triplets'")
            for given in aspects_of(rec) if task.needs_aspect else [None]:
                seq = generate(model, sent, task, beam, max_len, given, multitask)
                dec = decode_with_chunks(task, seq, model.classes, given, multitask)
                tuples = sorted(dec.tuples)
                line = {
                    "sentence": i,
                    "task": task.value,
                    "multitask": multitask,
                    "classes": list(model.classes.tokens),
                    "tokens": list(sent.tokens),
                    "word_begin": list(sent.word_begin),
                    "raw": list(seq.indexes),
                    "decoded": [tuple_to_json(t) for t in tuples],
                    "decoded_words": [tuple_to_json(_words_tuple(sent, t)) for t in tuples],
                    "invalid": {
                        "chunks": len(dec.chunks),
                        "size": dec.count("size"),
                        "order": dec.count("order"),
                    },
                }
                if given is not None:
                    line["aspect"] = list(given)
                    line["aspect_words"] = list(to_word_span(sent, given))
                lines.append(line)
    return lines


def write_jsonl(lines: Iterable[dict], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for line in lines:
            f.write(json.dumps(line, sort_keys=True, ensure_ascii=False) + "\n")


def read_jsonl(path) -> List[dict]:
    with open(path, encoding="utf-8") as f:
        return [json.loads(line) for line in f if line.strip()]


def load_model(path) -> Tuple[PointerSeq2Seq, dict]:
    model, meta = load_checkpoint(path)
    meta.setdefault("subtask", "Triplet")
    meta.setdefault("tags", [])
    meta.setdefault("tokenizer", WHITESPACE.to_dict())
    return model, meta


def run_prediction(checkpoint, data, out, subtask: Optional[str] = None, beam: int = 1, max_len=None) -> List[dict]:
    model, meta = load_model(checkpoint)
    trained = meta["subtask"]
    if subtask is not None and subtask.lower() != trained.lower():
        raise ConfigError(f"checkpoint was trained for {trained!r}, not {subtask!r}")
    if beam < 1:
        raise ConfigError("beam width must be >= 1")
    records = load_dataset(data, TokenizerConfig.from_dict(meta["tokenizer"]))
    lines = predict_records(model, records, trained, meta["tags"], beam, max_len or meta.get("max_len", 64))
    write_jsonl(lines, out)
    return lines


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

DERIVED = {
    Subtask.TRIPLET: {
        "Triplet": lambda t: t,
        "Pair": lambda t: (t[0], t[1]),
        "AESC": lambda t: (t[0], t[2]),
        "AE": lambda t: t[0],
        "OE": lambda t: t[1],
    },
    Subtask.PAIR: {"Pair": lambda t: t, "AE": lambda t: t[0], "OE": lambda t: t[1]},
    Subtask.AESC: {"AESC": lambda t: t, "AE": lambda t: t[0]},
}


def _views(task: Subtask, tuples) -> Dict[str, set]:
    views = DERIVED.get(task, {task.value: lambda t: t})
    return {name: {f(t) for t in tuples} for name, f in views.items()}


def evaluate_predictions(lines: Sequence[dict], gold: Sequence[DatasetRecord]) -> EvalReport:
    """Score prediction lines against word-level gold records."""
    if not lines:
        raise ConfigError("no predictions to evaluate")
    sentence_ids = {line["sentence"] for line in lines}
    if sentence_ids != set(range(len(gold))):
        raise ConfigError(f"predictions cover {len(sentence_ids)} sentences but gold has {len(gold)}")
    gold_sets: Dict[str, list] = defaultdict(list)
    pred_sets: Dict[str, list] = defaultdict(list)
    by_key = defaultdict(list)
    for line in lines:
        by_key[(line["task"], line["sentence"])].append(line)
    tasks = sorted({line["task"] for line in lines})
    for task_name in tasks:
        task = Subtask.parse(task_name)
        for i, rec in enumerate(gold):
            items = by_key.get((task_name, i), [])
            if task.needs_aspect:
                expected = aspects_of(rec)
                got = sorted(Span(*l["aspect_words"]) for l in items)
                if got != expected:
                    raise ConfigError(f"sentence {i}: predicted aspects {got} differ from gold {expected}")
                for line in items:
                    asp = Span(*line["aspect_words"])
                    g = project(task, rec.annotations, asp)
                    p = {tuple_from_json(t) for t in line["decoded_words"]}
                    gold_sets[task.value].append(g)
                    pred_sets[task.value].append(p)
                continue
            if len(items) != 1:
                raise ConfigError(f"sentence {i}: expected one {task_name} prediction, found {len(items)}")
            p = {tuple_from_json(t) for t in items[0]["decoded_words"]}
            g = project(task, rec.annotations)
            for name, view in _views(task, p).items():
                pred_sets[name].append(view)
            for name, view in _views(task, g).items():
                gold_sets[name].append(view)
    report = EvalReport()
    for name in gold_sets:
        report.rows[name] = score_corpus(gold_sets[name], pred_sets[name])
    if "AESC" in gold_sets:
        cond = score_conditioned(gold_sets["AESC"], pred_sets["AESC"])
        report.extras["ALSC|AE"] = cond.to_dict()
    return report


def run_evaluation(predictions, gold_path, out_dir=None, subtask: Optional[str] = None) -> EvalReport:
    lines = read_jsonl(predictions)
    if subtask is not None and subtask.lower() != MULTI:
        want = Subtask.parse(subtask).value
        lines = [l for l in lines if l["task"] == want]
        if not lines:
            raise ConfigError(f"no {want} predictions in {predictions}")
    report = evaluate_predictions(lines, load_dataset(gold_path))
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(report.to_json(), encoding="utf-8")
        (out / "report.txt").write_text(report.to_table(), encoding="utf-8")
    return report


# ---------------------------------------------------------------------------
# analysis
# ---------------------------------------------------------------------------


def validity_of_lines(lines: Sequence[dict]) -> ValidityReport:
    """Invalid size / order / token counts over prediction lines (all tasks pooled)."""
    total = ValidityReport(0, 0, 0, 0)
    groups = defaultdict(list)
    for line in lines:
        groups[(line["task"], bool(line.get("multitask")), tuple(line["classes"]))].append(line)
    for (task_name, multitask, class_tokens), group in sorted(groups.items()):
        classes = ClassTokenList(class_tokens)
        sents = [make_sentence(l["tokens"], l["word_begin"]) for l in group]
        seqs = [TargetSequence(tuple(l["raw"]), s.n, classes.l, raw=True) for l, s in zip(group, sents)]
        rep = validity_report(seqs, Subtask.parse(task_name), sents, classes, multitask)
        total = ValidityReport(
            total.total_chunks + rep.total_chunks,
            total.invalid_size + rep.invalid_size,
            total.invalid_order + rep.invalid_order,
            total.invalid_token + rep.invalid_token,
        )
    return total


def beam_sweep(checkpoint, data, beams: Sequence[int] = (1, 2, 4), max_len=None) -> List[dict]:
    """Main-task F1 for each beam width."""
    model, meta = load_model(checkpoint)
    records = load_dataset(data, TokenizerConfig.from_dict(meta["tokenizer"]))
    gold = load_dataset(data)
    main = meta["tags"][0] if meta["subtask"] == MULTI else Subtask.parse(meta["subtask"]).value
    rows = []
    for beam in beams:
        lines = predict_records(model, records, meta["subtask"], meta["tags"], beam, max_len or meta.get("max_len", 64))
        report = evaluate_predictions(lines, gold)
        rows.append({"beam": beam, "f1": float(report.rows[main].f1), "subtask": main})
    return rows


def sweep_table(rows: Sequence[dict]) -> str:
    lines = [f"{'beam':>5} {'F1':>8}", "-" * 14]
    lines += [f"{r['beam']:>5d} {r['f1'] * 100:8.2f}" for r in rows]
    return "\n".join(lines) + "\n"
