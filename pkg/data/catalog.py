import ast
import json
import logging
import operator
from typing import Dict, List, Optional

from utils.config import Config
from cps.errors import ConfigError
from cps.scheme import SchemeBasis
from cps.windows import WindowBox, WindowUnion

logger = logging.getLogger(__name__)

_OPERATORS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.USub: operator.neg,
    ast.UAdd: operator.pos,
}


def parse_scalar(value, field: str = "value") -> float:
    """
    A number, or an arithmetic expression over numbers and the symbolic
    constants in Config.SYMBOLIC_CONSTANTS ("tau", "sqrt2", "1-tau", "2*tau").
    """
    if isinstance(value, bool):
        raise ConfigError(f"{field}: expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"{field}: expected a number or expression, got {value!r}")

    def evaluate(node):
        if isinstance(node, ast.Expression):
            return evaluate(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id in Config.SYMBOLIC_CONSTANTS:
            return float(Config.SYMBOLIC_CONSTANTS[node.id])
        if isinstance(node, ast.BinOp) and type(node.op) in _OPERATORS:
            return _OPERATORS[type(node.op)](evaluate(node.left), evaluate(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPERATORS:
            return _OPERATORS[type(node.op)](evaluate(node.operand))
        raise ConfigError(f"{field}: unsupported expression {value!r}")

    try:
        return evaluate(ast.parse(value.strip(), mode='eval'))
    except SyntaxError as e:
        raise ConfigError(f"{field}: cannot parse {value!r}: {e}")


def parse_window(boxes, field: str = "window", eta: float = None, descriptor: str = "") -> WindowUnion:
    """
    Boxes given either as lists of [lo, hi] pairs (closed) or as objects
    {"bounds": [[lo, hi], ...], "closed": [[lo_closed, ...], [hi_closed, ...]]}.
    """
    if not isinstance(boxes, list) or not boxes:
        raise ConfigError(f"{field}: expected a nonempty list of boxes")
    parsed = []
    for i, box in enumerate(boxes):
        name = f"{field}[{i}]"
        if isinstance(box, dict):
            bounds = box.get('bounds')
            closed = box.get('closed') or [None, None]
            if not isinstance(closed, list) or len(closed) != 2:
                raise ConfigError(f"{name}.closed: expected [lo_closed, hi_closed]")
            lo_closed, hi_closed = closed
        else:
            bounds, lo_closed, hi_closed = box, None, None
        if not isinstance(bounds, list) or not all(isinstance(p, list) and len(p) == 2 for p in bounds):
            raise ConfigError(f"{name}: expected [[lo, hi], ...]")
        lo = tuple(parse_scalar(p[0], name) for p in bounds)
        hi = tuple(parse_scalar(p[1], name) for p in bounds)
        try:
            parsed.append(WindowBox(lo, hi, lo_closed, hi_closed))
        except ValueError as e:
            raise ConfigError(f"{name}: {e}")
    return WindowUnion(tuple(parsed), eta=eta, descriptor=descriptor or field)


def parse_matrix(rows, d: int, m: int, name: str, field: str = "scheme.matrix") -> SchemeBasis:
    if not isinstance(rows, list):
        raise ConfigError(f"{field}: expected a list of rows")
    matrix = [[parse_scalar(v, field) for v in row] for row in rows]
    try:
        return SchemeBasis(d, m, matrix, name=name)
    except ValueError as e:
        raise ConfigError(f"{field}: {e}")


class Catalog:
    """Bundled example schemes, windows and fixtures"""

    def __init__(self, path: str = None) -> None:
        self.path = path or Config.EXAMPLES_FILE
        try:
            with open(self.path, 'r') as f:
                self.examples: Dict[str, dict] = json.load(f)
            logger.info(f"Loaded {len(self.examples)} bundled examples")
        except Exception as e:
            logger.error(f"Failed to load example catalog {self.path}: {e}", exc_info=True)
            raise

    def names(self) -> List[str]:
        return list(self.examples)

    def get(self, name: str) -> dict:
        if name not in self.examples:
            raise ConfigError(f"scheme.example: unknown example '{name}' (known: {', '.join(self.examples)})")
        return self.examples[name]

    def is_fixture(self, name: str) -> bool:
        return bool(self.get(name).get('fixture', False))

    def get_scheme(self, name: str) -> SchemeBasis:
        """Scheme basis of a bundled example"""
        if self.is_fixture(name):
            raise ConfigError(f"scheme.example: '{name}' is a fixture, not a scheme")
        entry = self.get(name)
        return parse_matrix(entry['matrix'], entry['d'], entry['m'], name, field=f"examples.{name}.matrix")

    def get_window(self, name: str, eta: float = None) -> Optional[WindowUnion]:
        entry = self.get(name)
        if 'window' not in entry:
            return None
        return parse_window(entry['window'], field=f"examples.{name}.window", eta=eta, descriptor="W")

    def list_examples(self) -> List[dict]:
        """Rows of name, d, m, default window and description"""
        rows = []
        for name, entry in self.examples.items():
            window = entry.get('window')
            rows.append({
                'name': name,
                'd': entry['d'],
                'm': entry['m'],
                'window': json.dumps(window) if window is not None else '-',
                'description': entry.get('description', ''),
            })
        return rows

    def format_table(self) -> str:
        rows = self.list_examples()
        width = max(len(r['name']) for r in rows)
        lines = [f"{'name':<{width}}  d  m  window"]
        for r in rows:
            lines.append(f"{r['name']:<{width}}  {r['d']}  {r['m']}  {r['window']}  {r['description']}")
        return "\n".join(lines)
