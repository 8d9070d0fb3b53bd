"""Run configuration, CSV artifacts and the binary checkpoint format.

Checkpoint layout (little-endian)::

    b"MPDG" | u32 version=1 | u32 n_tensors
    per tensor: u16 name_len | name (UTF-8) | u8 rank | u32 dims[rank] | f64 data (row-major)
    u32 text_len | text (UTF-8 JSON: specs, train config, history snapshot, iteration)
"""
import json
import struct
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from . import nn
from .gan import HistoryRow, TrainConfig, TrainHistory, TrainState
from .problems import BenchmarkId, ClusterDataSpec

MAGIC = b"MPDG"
FORMAT_VERSION = 1
FLOAT_FMT = "%.17g"


class CheckpointError(ValueError):
    pass


# -- CSV ---------------------------------------------------------------------

def format_float(v):
    return FLOAT_FMT % v


def write_csv(path, header, rows):
    """Write rows of numbers (ints kept as ints, floats with 17 significant digits)."""
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, (bool, np.bool_)):
                cells.append("1" if v else "0")
            elif isinstance(v, (int, np.integer)):
                cells.append(str(int(v)))
            else:
                cells.append(format_float(float(v)))
        lines.append(",".join(cells))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path):
    """Return ``(header, float array)``; raises ValueError when there are no data rows."""
    with open(path) as fh:
        text = fh.read().strip().splitlines()
    if not text:
        raise ValueError(f"{path}: empty file")
    header = text[0].strip().split(",")
    rows = [[float(c) for c in line.split(",")] for line in text[1:] if line.strip()]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return header, np.array(rows, dtype=np.float64)


def write_dataset(path, points):
    points = np.asarray(points, dtype=np.float64)
    write_csv(path, [f"x{i + 1}" for i in range(points.shape[1])], points)


def read_dataset(path):
    return read_csv(path)[1]


def write_history(path, history):
    write_csv(path, TrainHistory.COLUMNS,
              [(r.iteration, r.d_loss, r.g_adv_loss, r.pad_loss, r.gamma1, r.mean_quality)
               for r in history.rows])


def archive_header(d, dx, m):
    return (["eval_index"] + [f"z{i + 1}" for i in range(d)] + [f"x{i + 1}" for i in range(dx)]
            + [f"f{i + 1}" for i in range(m)] + ["is_pareto", "hypervolume"])


def write_archive(path, archive):
    recs = archive.records
    d, dx, m = len(recs[0].z), len(recs[0].x), len(recs[0].f)
    pareto = set(archive.pareto)
    rows = []
    for i, r in enumerate(recs):
        rows.append([r.eval_index, *map(float, r.z), *map(float, r.x), *map(float, r.f),
                     i in pareto, archive.hv_history[i]])
    write_csv(path, archive_header(d, dx, m), rows)


def read_archive(path):
    """Parse an archive CSV into a dict of column blocks."""
    header, data = read_csv(path)
    cols = {name: data[:, i] for i, name in enumerate(header)}

    def block(prefix):
        names = [h for h in header if h.startswith(prefix) and h[len(prefix):].isdigit()]
        return np.column_stack([cols[n] for n in names]) if names else np.zeros((len(data), 0))

    return {
        "eval_index": cols["eval_index"].astype(int),
        "z": block("z"),
        "x": block("x"),
        "f": block("f"),
        "is_pareto": cols["is_pareto"].astype(bool),
        "hypervolume": cols["hypervolume"],
    }


# -- checkpoints -------------------------------------------------------------

@dataclass
class Checkpoint:
    generator_spec: nn.MlpSpec
    generator: nn.MlpParams
    discriminator_spec: nn.MlpSpec
    discriminator: nn.MlpParams
    train_config: dict
    iteration: int
    benchmark: str = None
    history: list = field(default_factory=list)
    format_version: int = FORMAT_VERSION

    @classmethod
    def from_state(cls, state, cfg, benchmark=None, history=None):
        rows = [list(asdict(r).values()) for r in history.rows] if history is not None else []
        bench = BenchmarkId.parse(benchmark).value if benchmark is not None else None
        return cls(state.generator_spec, state.generator, state.discriminator_spec,
                   state.discriminator, cfg.to_dict(), state.iteration, bench, rows)

    def to_state(self):
        """A TrainState usable for generation (optimizer moments reset)."""
        cfg = self.config()
        return TrainState(self.generator, self.generator_spec, self.discriminator,
                          self.discriminator_spec, nn.AdamState.zeros(self.generator),
                          nn.AdamState.zeros(self.discriminator), np.random.default_rng(cfg.seed),
                          cfg.data_box, self.iteration)

    def config(self):
        d = dict(self.train_config)
        d["data_box"] = tuple(tuple(b) for b in d["data_box"])
        return TrainConfig(**d)

    def history_obj(self):
        h = TrainHistory()
        for row in self.history:
            h.append(HistoryRow(int(row[0]), *map(float, row[1:])))
        return h


def _spec_dict(spec):
    return {"layer_sizes": list(spec.layer_sizes), "output_activation": spec.output_activation,
            "leaky_slope": spec.leaky_slope}


def save_checkpoint(path, ckpt):
    tensors = ckpt.generator.named_tensors("generator.") + ckpt.discriminator.named_tensors("discriminator.")
    out = [MAGIC, struct.pack("<II", ckpt.format_version, len(tensors))]
    for name, arr in tensors:
        arr = np.ascontiguousarray(arr, dtype="<f8")
        raw = name.encode("utf-8")
        out.append(struct.pack("<H", len(raw)) + raw)
        out.append(struct.pack("<B", arr.ndim) + struct.pack(f"<{arr.ndim}I", *arr.shape))
        out.append(arr.tobytes(order="C"))
    meta = {
        "format_version": ckpt.format_version,
        "benchmark": ckpt.benchmark,
        "generator_spec": _spec_dict(ckpt.generator_spec),
        "discriminator_spec": _spec_dict(ckpt.discriminator_spec),
        "train_config": ckpt.train_config,
        "iteration": ckpt.iteration,
        "history_columns": list(TrainHistory.COLUMNS),
        "history": ckpt.history,
    }
    text = json.dumps(meta, sort_keys=True, separators=(",", ":")).encode("utf-8")
    out.append(struct.pack("<I", len(text)) + text)
    with open(path, "wb") as fh:
        fh.write(b"".join(out))


def load_checkpoint(path):
    with open(path, "rb") as fh:
        buf = fh.read()
    if buf[:4] != MAGIC:
        raise CheckpointError(f"{path}: not a checkpoint (bad magic)")
    try:
        version, count = struct.unpack_from("<II", buf, 4)
        if version != FORMAT_VERSION:
            raise CheckpointError(f"{path}: unsupported format version {version}")
        pos = 12
        tensors = {}
        for _ in range(count):
            (nlen,) = struct.unpack_from("<H", buf, pos)
            pos += 2
            name = buf[pos:pos + nlen].decode("utf-8")
            pos += nlen
            (rank,) = struct.unpack_from("<B", buf, pos)
            pos += 1
            dims = struct.unpack_from(f"<{rank}I", buf, pos)
            pos += 4 * rank
            n = int(np.prod(dims)) if rank else 1
            tensors[name] = np.frombuffer(buf, dtype="<f8", count=n, offset=pos).reshape(dims).astype(np.float64)
            pos += 8 * n
        (tlen,) = struct.unpack_from("<I", buf, pos)
        meta = json.loads(buf[pos + 4:pos + 4 + tlen].decode("utf-8"))
    except (struct.error, ValueError, UnicodeDecodeError) as exc:
        raise CheckpointError(f"{path}: corrupt checkpoint ({exc})") from exc

    def params(prefix, spec):
        ws = [tensors[f"{prefix}.W{i}"] for i in range(spec.n_layers)]
        bs = [tensors[f"{prefix}.b{i}"] for i in range(spec.n_layers)]
        return nn.MlpParams(ws, bs)

    g_spec = nn.MlpSpec(**meta["generator_spec"])
    d_spec = nn.MlpSpec(**meta["discriminator_spec"])
    try:
        g, d = params("generator", g_spec), params("discriminator", d_spec)
    except KeyError as exc:
        raise CheckpointError(f"{path}: missing tensor {exc}") from exc
    return Checkpoint(g_spec, g, d_spec, d, meta["train_config"], meta["iteration"],
                      meta.get("benchmark"), meta.get("history", []), version)


# -- run configuration ---------------------------------------------------------

@dataclass(frozen=True)
class MoboSettings:
    n_init: int = 5
    n_iter: int = 50
    ref: tuple = (0.0, 0.0)
    n_candidates: int = 1000
    mc_samples: int = 128


@dataclass(frozen=True)
class RunConfig:
    benchmark: BenchmarkId = BenchmarkId.KNO1
    data: ClusterDataSpec = ClusterDataSpec()
    train: TrainConfig = TrainConfig()
    mobo: MoboSettings = MoboSettings()
    n_seeds: int = 10
    output_dir: str = "run"


# quality settings are stored on TrainConfig; accept them under quality.* as well
_QUALITY_ALIASES = {
    "gamma0": "gamma0",
    "bandwidth": "bandwidth",
    "quality_floor": "quality_floor",
    "use_realisticity_weighting": "realisticity_weighting",
}


def parse_value(text):
    text = text.strip()
    low = text.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no"):
        return False
    if low in ("none", "off", "null"):
        return None
    if "," in text:
        return tuple(parse_value(t) for t in text.split(",") if t.strip())
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text.strip("\"'")


def parse_config_text(text):
    """``key = value`` lines (``#`` comments, dotted section prefixes) into a flat dict."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = parse_value(value)
    return out


def _coerce(cls, current, key, value):
    names = {f.name for f in fields(cls)}
    if key not in names:
        raise ValueError(f"unknown setting {key!r} for {cls.__name__}")
    old = getattr(current, key)
    if key in ("data_box", "box", "ref"):
        flat = value if isinstance(value, tuple) else (value,)
        if key == "data_box":
            value = tuple(tuple(float(v) for v in flat[i:i + 2]) for i in range(0, len(flat), 2))
        else:
            value = tuple(float(v) for v in flat)
    elif isinstance(old, bool):
        value = bool(value)
    elif isinstance(old, int) and isinstance(value, (int, float)) and not isinstance(value, bool):
        value = int(value)
    elif isinstance(old, float) and isinstance(value, (int, float)):
        value = float(value)
    return value


def apply_overrides(cfg, settings):
    """Return a RunConfig with dotted-key ``settings`` applied."""
    sections = {"data": {}, "train": {}, "mobo": {}}
    top = {}
    for key, value in settings.items():
        if "." in key:
            section, name = key.split(".", 1)
            if section == "quality":
                if name == "weights":
                    continue  # resampled every batch; nothing to configure
                section, name = "train", _QUALITY_ALIASES.get(name, name)
            if section not in sections:
                raise ValueError(f"unknown config section {section!r}")
            sections[section][name] = value
        else:
            top[key] = value
    new = {}
    for section, cls in (("data", ClusterDataSpec), ("train", TrainConfig), ("mobo", MoboSettings)):
        cur = getattr(cfg, section)
        vals = {k: _coerce(cls, cur, k, v) for k, v in sections[section].items()}
        new[section] = replace(cur, **vals) if vals else cur
    for key, value in top.items():
        if key == "benchmark":
            new["benchmark"] = BenchmarkId.parse(value)
        elif key in ("n_seeds", "output_dir"):
            new[key] = int(value) if key == "n_seeds" else str(value)
        else:
            raise ValueError(f"unknown setting {key!r}")
    return replace(cfg, **new)


def load_config(path, overrides=None):
    with open(path) as fh:
        settings = parse_config_text(fh.read())
    if overrides:
        settings.update(overrides)
    return apply_overrides(RunConfig(), settings)


def config_to_text(cfg):
    lines = [f"benchmark = {cfg.benchmark.value}", f"n_seeds = {cfg.n_seeds}",
             f"output_dir = {cfg.output_dir}"]

    def fmt(v):
        if isinstance(v, tuple):
            return ",".join(fmt(x) for x in (np.ravel(v) if v and isinstance(v[0], tuple) else v))
        if v is None:
            return "none"
        if isinstance(v, bool):
            return "true" if v else "false"
        return repr(v)

    for section in ("data", "train", "mobo"):
        obj = getattr(cfg, section)
        for f in fields(obj):
            v = getattr(obj, f.name)
            if f.name == "data_box":
                v = tuple(float(x) for b in v for x in b)
            lines.append(f"{section}.{f.name} = {fmt(v)}")
    return "\n".join(lines) + "\n"
