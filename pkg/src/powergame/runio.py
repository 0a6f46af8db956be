"""Config-file parsing, channel CSV loading, and result/manifest output.

The experiment config is a flat `key = value` text file with `#` comments.
Channel matrices are plain CSV, K rows by D columns of positive gains.
Every emitted CSV starts with a `# manifest:` comment embedding the JSON
run manifest, and the same manifest is written as a sidecar .json file.
"""

import csv
import json
import os
import time
from dataclasses import asdict

from powergame.core import ChannelMatrix, PowerGameError, SystemConfig
from powergame.montecarlo import ExperimentSpec


class ConfigError(PowerGameError):
    """Malformed config or channel file."""


_INT_KEYS = {"K", "D", "N", "L", "M_bits", "M_exp", "trials", "max_rounds", "seed"}
_FLOAT_KEYS = {"noise_power", "p_max", "R", "tol"}
_LIST_KEYS = {"sweep_N", "sweep_K"}


def parse_config(path):
    """Read a key/value config file into a typed dict."""
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
            key, _, text = line.partition("=")
            key, text = key.strip(), text.strip()
            try:
                if key in _INT_KEYS:
                    values[key] = int(text)
                elif key in _FLOAT_KEYS:
                    values[key] = float(text)
                elif key in _LIST_KEYS:
                    values[key] = tuple(int(v.strip()) for v in text.split(",") if v.strip())
                else:
                    raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from exc
    return values


def build_spec(values, **overrides):
    """Assemble an ExperimentSpec from parsed config values plus overrides.

    Overrides (CLI flags) win over file values; `sweep` is taken from
    sweep_N or sweep_K depending on which run consumes the spec.
    """
    merged = dict(values)
    merged.update({k: v for k, v in overrides.items() if v is not None})
    try:
        config = SystemConfig(
            K=merged.get("K", 2),
            D=merged.get("D", 2),
            N=merged.get("N", 16),
            noise_power=merged.get("noise_power", 5e-16),
            p_max=merged.get("p_max", 1e6),
            L=merged.get("L", 100),
            M_bits=merged.get("M_bits", 100),
            R=merged.get("R", 1e5),
            m_exp=merged.get("M_exp"),
        )
        return ExperimentSpec(
            config=config,
            trials=merged.get("trials", 20000),
            max_rounds=merged.get("max_rounds", 20),
            tol=merged.get("tol", 1e-9),
            seed=merged.get("seed", 0),
            sweep=tuple(merged.get("sweep", ())),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_csv_matrix(path, K=None, D=None):
    """Load a numeric CSV matrix, validating shape when K/D are given."""
    rows = []
    with open(path) as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: non-numeric channel gain: {exc}") from exc
            if D is not None and len(rows[-1]) != D:
                raise ConfigError(f"{path}:{lineno}: expected {D} columns, got {len(rows[-1])}")
    if K is not None and len(rows) != K:
        raise ConfigError(f"{path}: expected {K} rows, got {len(rows)}")
    return rows


def load_channels(path, K=None, D=None):
    """Load a K x D channel-gain CSV (strictly positive entries)."""
    try:
        return ChannelMatrix(load_csv_matrix(path, K, D))
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def fmt(x):
    """Numeric output convention: 9 significant digits."""
    return f"{float(x):.9g}"


def make_manifest(command, spec, config_path=None, outputs=(), seed=None, extra=None):
    from powergame import __version__

    manifest = {
        "tool": "powergame",
        "version": __version__,
        "command": command,
        "config_file": config_path,
        "seed": spec.seed if seed is None else seed,
        "spec": asdict(spec),
        "outputs": list(outputs),
        "started_unix": time.time(),
    }
    if extra:
        manifest.update(extra)
    return manifest


def write_csv(path, header, rows, manifest=None):
    """Write a CSV, embedding the manifest as a leading comment line."""
    with open(path, "w", newline="") as fh:
        if manifest is not None:
            fh.write("# manifest: " + json.dumps(manifest, sort_keys=True) + "\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def write_manifest(path, manifest):
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def default_out_dir():
    return os.environ.get("POWERGAME_OUT", ".")
