"""Rendering of explored state spaces and corpus summaries.

Figures are rendered headlessly to files; tabular output is tab-separated so
it can be consumed by standard shell tooling.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import IO

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import networkx as nx  # noqa: E402

from .explorer import StateSpace  # noqa: E402


def render_state_space(space: StateSpace, path: str, title: str = "") -> None:
    """Draw the explored configuration graph to an image file.

    Terminal configurations are green, stuck ones red, interior ones grey.
    Edge labels carry the event kind of the reduction.
    """
    g = nx.DiGraph()
    index = {key: i for i, key in enumerate(space.nodes)}
    colors = []
    for key, i in index.items():
        g.add_node(i)
        if space.is_terminal(key):
            colors.append("#7fc97f")
        elif key in space.expanded and not space.edges[key]:
            colors.append("#f46d43")
        else:
            colors.append("#cccccc")
    labels = {}
    for src, outs in space.edges.items():
        for event, dst in outs:
            g.add_edge(index[src], index[dst])
            labels.setdefault((index[src], index[dst]), event.redex.kind)

    fig, ax = plt.subplots(figsize=(max(6, len(g) ** 0.5), max(5, len(g) ** 0.5)))
    pos = nx.spring_layout(g, seed=11)
    nx.draw_networkx_nodes(g, pos, ax=ax, node_color=colors, node_size=120)
    nx.draw_networkx_edges(g, pos, ax=ax, arrowsize=8, alpha=0.6)
    if len(g) <= 60:
        nx.draw_networkx_edge_labels(g, pos, edge_labels=labels, ax=ax, font_size=6)
    ax.set_title(title or f"{len(space.nodes)} configurations, "
                 f"{sum(len(v) for v in space.edges.values())} transitions")
    ax.axis("off")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


@dataclass
class CorpusRow:
    name: str
    mode: str
    processes: int
    communications: int
    nodes: int
    outcome: str
    status: str


CORPUS_COLUMNS = ["name", "mode", "processes", "communications",
                  "nodes", "outcome", "status"]


def write_corpus_table(rows: list[CorpusRow], stream: IO[str]) -> None:
    writer = csv.writer(stream, delimiter="\t", lineterminator="\n")
    writer.writerow(CORPUS_COLUMNS)
    for r in rows:
        writer.writerow([r.name, r.mode, r.processes, r.communications,
                         r.nodes, r.outcome, r.status])


def render_corpus_summary(rows: list[CorpusRow], path: str) -> None:
    """Bar chart of state-space sizes per corpus program."""
    names = [r.name for r in rows]
    sizes = [r.nodes for r in rows]
    colors = ["#7fc97f" if r.status == "ok" else "#f46d43" for r in rows]
    fig, ax = plt.subplots(figsize=(max(8, len(rows) * 0.35), 5))
    ax.bar(range(len(rows)), sizes, color=colors)
    ax.set_xticks(range(len(rows)))
    ax.set_xticklabels(names, rotation=75, ha="right", fontsize=7)
    ax.set_ylabel("explored configurations")
    ax.set_title("bundled corpus state-space sizes")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
