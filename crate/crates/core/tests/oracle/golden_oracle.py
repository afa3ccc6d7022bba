"""Brute-force reference curation of the fixture in tests/fixtures/.

Written without reference to the Rust sources: set arithmetic for the
sieves, exhaustive enumeration of contiguous partitions for segment merging,
and a naive scan over every step row for retrieval. Writes
tests/fixtures/golden/{pairs,split,dataset}.jsonl and manifest.json.
    python3 golden_oracle.py
"""
import itertools
import json
import math
import os
import re
import struct

import simplemma

HERE = os.path.dirname(os.path.abspath(__file__))
FIX = os.path.join(HERE, "..", "fixtures")
DATA = os.path.join(HERE, "..", "..", "data")
GOLDEN = os.path.join(FIX, "golden")

MAX_DURATION = 600.0
MIN_PER_CATEGORY = 5
LAMBDA_IOU = 0.1
LAMBDA_RECALL = 0.3
LAMBDA_VAL = 0.2
LAMBDA_SIM = 0.75
MERGE_DUR = 8.0
MERGE_GAP = 4.0

TOKEN = re.compile(r"[a-z0-9]+(?:['-][a-z0-9]+)*")


def read_jsonl(path):
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def load_stoplist():
    words = set()
    for name in ("function_words.txt", "generic_recipe_words.txt"):
        with open(os.path.join(DATA, name), encoding="utf-8") as fh:
            for line in fh:
                w = line.split("#", 1)[0].strip().lower()
                if w:
                    words.add(w)
    return words


STOP = load_stoplist()


def content(text):
    out = set()
    for tok in TOKEN.findall(text.lower()):
        lemma = simplemma.lemmatize(tok, lang="en")
        if tok in STOP or lemma in STOP:
            continue
        out.add(lemma)
    return out


def load_sseb(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    assert raw[:4] == b"SSEB"
    version, dim, count = struct.unpack("<IIQ", raw[4:20])
    assert version == 1
    floats = struct.unpack("<%df" % (dim * count), raw[20:])
    with open(path[:-5] + ".ids", encoding="utf-8") as fh:
        ids = fh.read().split("\n")[:-1]
    assert len(ids) == count
    rows = {}
    for k, i in enumerate(ids):
        rows[i] = normalize(list(floats[k * dim:(k + 1) * dim]))
    return rows


def to_f32(x):
    return struct.unpack("<f", struct.pack("<f", x))[0]


def norm(v):
    acc = 0.0
    for x in v:
        acc += x * x
    return math.sqrt(acc)


def normalize(v):
    n = norm(v)
    unit = [to_f32(x / n) for x in v]
    return unit, norm(unit)


def cosine(a, b):
    (va, na), (vb, nb) = a, b
    acc = 0.0
    for x, y in zip(va, vb):
        acc += x * y
    return min(1.0, max(-1.0, acc / (na * nb)))


def can_join(run_start, run_end, seg_start, seg_end):
    gap = max(0.0, seg_start - run_end)
    return run_end - run_start < MERGE_DUR and seg_end - seg_start < MERGE_DUR and gap < MERGE_GAP


def merge(segments):
    """Finds the unique contiguous partition in which every segment joins
    the run before it exactly when the join rule allows."""
    n = len(segments)
    found = []
    for cuts in itertools.product([False, True], repeat=max(0, n - 1)):
        ok = True
        runs = []
        for i, seg in enumerate(segments):
            s, e = seg["start_s"], seg["end_s"]
            if i == 0 or cuts[i - 1]:
                if i > 0 and can_join(runs[-1][1], runs[-1][2], s, e):
                    ok = False
                    break
                runs.append([[i], s, e])
            else:
                run = runs[-1]
                if not can_join(run[1], run[2], s, e):
                    ok = False
                    break
                run[0].append(i)
                run[2] = max(run[2], e)
        if ok:
            found.append(runs)
    assert len(found) == 1, "merge partition not unique"
    return found[0]


def dumps(obj):
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=False)


def main():
    videos = read_jsonl(os.path.join(FIX, "videos.jsonl"))
    recipes = read_jsonl(os.path.join(FIX, "recipes.jsonl"))
    recipe_by_id = {r["recipe_id"]: r for r in recipes}

    short = [v for v in videos if v["duration_s"] <= MAX_DURATION]
    per_cat = {}
    for v in short:
        per_cat[v["category"]] = per_cat.get(v["category"], 0) + 1
    source = [v for v in short if per_cat[v["category"]] >= MIN_PER_CATEGORY]

    title_pairs = []
    for v in source:
        tv = content(v["title"])
        for r in recipes:
            if tv & content(r["title"]):
                title_pairs.append((v["video_id"], r["recipe_id"]))
    title_pairs.sort()

    video_by_id = {v["video_id"]: v for v in source}
    kept = []
    for vid, rid in title_pairs:
        a = content(" ".join(s["text"] for s in video_by_id[vid]["segments"]))
        b = content(" ".join(recipe_by_id[rid]["steps"]))
        inter = len(a & b)
        union = len(a | b)
        iou = inter / union if union else 0.0
        recall = inter / len(b) if b else 0.0
        if iou >= LAMBDA_IOU and recall >= LAMBDA_RECALL:
            kept.append({"video_id": vid, "recipe_id": rid, "token_iou": iou, "token_recall": recall})

    best = {}
    for p in kept:
        best[p["video_id"]] = max(best.get(p["video_id"], -1.0), p["token_iou"])
    split = {vid: ("validation" if iou >= LAMBDA_VAL else "train") for vid, iou in best.items()}

    r2 = {p["recipe_id"] for p in kept}
    steps = load_sseb(os.path.join(FIX, "step_emb.sseb"))
    pool = []
    for sid, vec in steps.items():
        rid, _, idx = sid.rpartition("#")
        if rid in r2 and idx.isdigit() and int(idx) < len(recipe_by_id[rid]["steps"]):
            pool.append((sid, rid, int(idx), vec))
    segs = load_sseb(os.path.join(FIX, "seg_emb.sseb"))

    dataset, failed = [], 0
    before = merged_total = 0
    for vid in sorted(split):
        video = video_by_id[vid]
        runs = merge(video["segments"])
        ids = ["%s#%d" % (vid, m) for m in range(len(runs))]
        if any(i not in segs for i in ids) or "%s#%d" % (vid, len(runs)) in segs:
            failed += 1
            continue
        out = []
        for run, sid in zip(runs, ids):
            q = segs[sid]
            top = None
            for step_id, rid, idx, vec in pool:
                sim = cosine(q, vec)
                if top is None or sim > top[0] or (sim == top[0] and step_id < top[1]):
                    top = (sim, step_id, rid, idx)
            if top is None or top[0] < LAMBDA_SIM:
                continue
            sim, _, rid, idx = top
            if out and out[-1]["recipe_id"] == rid and out[-1]["step_index"] == idx:
                out[-1]["start_s"] = min(out[-1]["start_s"], run[1])
                out[-1]["end_s"] = max(out[-1]["end_s"], run[2])
                out[-1]["similarity"] = max(out[-1]["similarity"], sim)
                continue
            out.append({
                "recipe_id": rid,
                "step_index": idx,
                "text": recipe_by_id[rid]["steps"][idx],
                "start_s": run[1],
                "end_s": run[2],
                "similarity": sim,
            })
        before += len(video["segments"])
        merged_total += len(runs)
        dataset.append({"video_id": vid, "title": video["title"], "split": split[vid], "segments": out})

    manifest = {
        "videos": len(dataset),
        "train_videos": sum(1 for d in dataset if d["split"] == "train"),
        "validation_videos": sum(1 for d in dataset if d["split"] == "validation"),
        "empty_videos": sum(1 for d in dataset if not d["segments"]),
        "failed_videos": failed,
        "segments_before": before,
        "segments_merged": merged_total,
        "segments_after": sum(len(d["segments"]) for d in dataset),
        "config": {
            "max_duration_s": MAX_DURATION,
            "min_per_category": MIN_PER_CATEGORY,
            "lambda_iou": LAMBDA_IOU,
            "lambda_recall": LAMBDA_RECALL,
            "lambda_val": LAMBDA_VAL,
            "lambda_sim": LAMBDA_SIM,
            "merge_max_dur_s": MERGE_DUR,
            "merge_max_gap_s": MERGE_GAP,
            "retrieval_pool": "global",
            "recall_denominator": "recipe",
            "strict_ingest": True,
        },
    }

    os.makedirs(GOLDEN, exist_ok=True)
    for name, rows in (("pairs.jsonl", kept),
                       ("split.jsonl", [{"video_id": k, "split": split[k]} for k in sorted(split)]),
                       ("dataset.jsonl", dataset)):
        with open(os.path.join(GOLDEN, name), "w", encoding="utf-8", newline="\n") as fh:
            for row in rows:
                fh.write(dumps(row) + "\n")
    with open(os.path.join(GOLDEN, "manifest.json"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(manifest, indent=2, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main()
