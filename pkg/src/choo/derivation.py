"""Derivation trees: which inference rule concluded each execution step.

Rule numbers follow the operational semantics: 1 backchaining on a
clause body, 2 instantiating a universally quantified clause, 3 clause
selection for a call, 4 conditions, 5 assignment, 6 sequencing, 7
unbounded choose, 8 bounded choose. Both the search engine and the
exhaustive checker build these trees, so the type lives apart from both.
"""

from __future__ import annotations

from dataclasses import dataclass

# arity of each rule: how many subderivations it must carry
RULE_CHILDREN = {1: 1, 2: 1, 3: 1, 4: 0, 5: 0, 6: 2, 7: 1, 8: 1}


@dataclass(frozen=True)
class DerivationNode:
    rule: int
    conclusion: str
    children: tuple

    def __post_init__(self):
        if self.rule not in RULE_CHILDREN:
            raise ValueError(f"unknown rule number {self.rule}")


def validate_shape(node: DerivationNode) -> None:
    """Raise ValueError if any node carries the wrong number of children."""
    expected = RULE_CHILDREN[node.rule]
    if len(node.children) != expected:
        raise ValueError(
            f"rule {node.rule} node has {len(node.children)} children, wants {expected}"
        )
    for child in node.children:
        validate_shape(child)


def format_tree(node: DerivationNode, indent: int = 0) -> str:
    pad = "  " * indent
    lines = [f"{pad}[rule {node.rule}] {node.conclusion}"]
    for child in node.children:
        lines.append(format_tree(child, indent + 1))
    return "\n".join(lines)
