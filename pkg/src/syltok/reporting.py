"""Report rendering shared by the evaluation commands.

Every evaluation emits two views of the same mapping: an aligned
human-readable table on stdout (fractions shown as percentages) and a
machine-readable key-value file with one metric per line, floats at 4
decimal places. Reruns over unchanged inputs reproduce both byte for byte.
"""

from __future__ import annotations

_PERCENT_KEYS = {
    "precision",
    "recall",
    "f1",
    "over_segmentation",
    "token_precision",
    "token_recall",
    "token_f1",
    "r_value",
    "pc_purity",
    "ps_purity",
    "snmi",
}


def format_table(metrics: dict, title: str | None = None) -> str:
    width = max(len(k) for k in metrics)
    lines = []
    if title:
        lines.append(title)
        lines.append("-" * len(title))
    for key, value in metrics.items():
        if isinstance(value, bool) or isinstance(value, int):
            shown = str(value)
        elif key in _PERCENT_KEYS:
            shown = f"{100.0 * value:+.2f}%" if key == "over_segmentation" else f"{100.0 * value:.2f}%"
        else:
            shown = f"{value:.4f}"
        lines.append(f"{key.ljust(width)}  {shown}")
    return "\n".join(lines)


def write_kv(metrics: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for key, value in metrics.items():
            if isinstance(value, bool) or isinstance(value, int):
                f.write(f"{key}\t{value}\n")
            else:
                f.write(f"{key}\t{value:.4f}\n")


def read_kv(path) -> dict[str, float]:
    out = {}
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.rstrip("\n")
            if not line:
                continue
            key, value = line.split("\t")
            out[key] = float(value)
    return out
