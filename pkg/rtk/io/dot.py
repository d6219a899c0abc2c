"""DOT export of finite orders, transitively reduced."""


def _escape(label):
    return str(label).replace("\\", "\\\\").replace('"', '\\"')


def covering_pairs(size, order):
    """Pairs (i, j) with i < j and nothing strictly between them."""
    strict = {(i, j) for i, j in order if i != j}
    return sorted(
        (i, j)
        for i, j in strict
        if not any((i, k) in strict and (k, j) in strict for k in range(size))
    )


def export_dot(labels, order):
    """One node per label and one edge per covering pair; byte-stable."""
    lines = ["digraph rtk {", "  rankdir=BT;"]
    for i, label in enumerate(labels):
        lines.append(f'  n{i} [label="{_escape(label)}"];')
    for i, j in covering_pairs(len(labels), order):
        lines.append(f"  n{i} -> n{j};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def lattice_dot(lattice):
    """Complete subsystems ordered by inclusion, the centre at the bottom."""
    labels = [_node_label(node) for node in lattice.nodes]
    return export_dot(labels, lattice.order())


def _node_label(node):
    names = [str(f) for f in node.elements]
    if len(names) > 6:
        return f"{len(names)} maps"
    return ", ".join(names)


def quotient_dot(quotient):
    """Convertibility classes; an edge points from a class to the classes it reaches."""
    labels = [" | ".join(str(v) for v in members) for members in quotient.classes]
    return export_dot(labels, quotient.order)
