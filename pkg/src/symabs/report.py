"""Figure rendering for the CLI report paths.

Deterministic matplotlib figures written next to the delimited outputs: a
layered drawing of the hierarchy DAG and the divergence/entropy curves of a
learning run.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def _layer_of(dag):
    """Longest-path rank from the finest side; coarser nodes rank higher."""
    order = {n.id: 0 for n in dag.nodes}
    changed = True
    while changed:
        changed = False
        for u, v in dag.edges:
            if order[v] < order[u] + 1:
                order[v] = order[u] + 1
                changed = True
    return order


def render_dag(dag, path):
    layers = _layer_of(dag)
    by_layer = {}
    for node in dag.nodes:
        by_layer.setdefault(layers[node.id], []).append(node)
    pos = {}
    for layer, nodes in sorted(by_layer.items()):
        nodes.sort(key=lambda n: n.id)
        for col, node in enumerate(nodes):
            pos[node.id] = (col - (len(nodes) - 1) / 2.0, layer)
    width = max(len(v) for v in by_layer.values()) if by_layer else 1
    height = max(by_layer) + 1 if by_layer else 1
    fig, ax = plt.subplots(figsize=(max(4.0, 2.2 * width),
                                    max(3.0, 1.4 * height)))
    for u, v in dag.edges:
        (x0, y0), (x1, y1) = pos[u], pos[v]
        ax.annotate("", xy=(x1, y1 - 0.12), xytext=(x0, y0 + 0.12),
                    arrowprops={"arrowstyle": "->", "color": "0.45",
                                "shrinkA": 4, "shrinkB": 4})
    for node in dag.nodes:
        x, y = pos[node.id]
        text = "\n".join(node.labels[:2])
        if len(node.labels) > 2:
            text += f"\n(+{len(node.labels) - 2})"
        text += f"\n{node.cell_count} cells"
        ax.text(x, y, text, ha="center", va="center", fontsize=8,
                bbox={"boxstyle": "round,pad=0.3", "fc": "#dce9f5",
                      "ec": "#3b6ea5"})
    ax.set_xlim(min(x for x, _ in pos.values()) - 1,
                max(x for x, _ in pos.values()) + 1)
    ax.set_ylim(-0.6, (max(by_layer) if by_layer else 0) + 0.6)
    ax.set_axis_off()
    ax.set_title("abstraction hierarchy (upward = coarser)", fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_learning(trace, path):
    ks = [rec["k"] for rec in trace]
    divs = [rec["divergence"] for rec in trace]
    ents = [rec["studentEntropy"] for rec in trace]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8, 3))
    finite = [d for d in divs if d != float("inf")]
    cap = (max(finite) * 1.2 + 1.0) if finite else 1.0
    shown = [d if d != float("inf") else cap for d in divs]
    ax1.plot(ks, shown, "o-", color="#b04a3a")
    for k, d in zip(ks, divs):
        if d == float("inf"):
            ax1.annotate("inf", (k, cap), ha="center", va="bottom", fontsize=8)
    ax1.set_xlabel("rule")
    ax1.set_ylabel("divergence (bits)")
    ax1.set_title("teacher gap per rule", fontsize=10)
    ax2.plot(ks, ents, "s-", color="#3b6ea5")
    ax2.set_xlabel("rule")
    ax2.set_ylabel("student entropy (bits)")
    ax2.set_title("student entropy", fontsize=10)
    for ax in (ax1, ax2):
        ax.grid(True, alpha=0.3)
        if ks:
            ax.set_xticks(ks)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
