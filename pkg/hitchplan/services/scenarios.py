import json
import math
import re
from dataclasses import dataclass, field
from typing import List, Optional, Union

from ..exceptions import ScenarioError
from ..kinematics import TrailerGeometry

# Keys a scenario file may carry. Anything else is reported, not ignored.
KNOWN_FIELDS = {
    'l_r', 'l_t', 'phi_max', 'q0', 'q1', 'tol', 'max_iter', 'alpha', 'seed',
    'steps', 'restart_rule', 'radius', 'target', 'name',
}


@dataclass
class Scenario:
    l_r: float
    l_t: float
    phi_max: Optional[float] = None
    q0: List[float] = field(default_factory=lambda: [0.0, 0.0, 0.0, 0.0])
    q1: List[float] = field(default_factory=lambda: [0.0, 0.0, 0.0, 0.0])
    tol: Optional[float] = None
    max_iter: Optional[int] = None
    # A number pins the scale; 'search' asks for the alpha search; None defers to settings.
    alpha: Union[float, str, None] = None
    seed: Optional[int] = None
    steps: Optional[int] = None
    restart_rule: Optional[str] = None
    radius: Optional[float] = None
    target: Optional[List[float]] = None
    name: str = ''

    @property
    def geometry(self) -> TrailerGeometry:
        return TrailerGeometry(self.l_r, self.l_t, self.phi_max)


def _line_of(text: str, key: str) -> Optional[int]:
    match = re.search(r'"%s"\s*:' % re.escape(key), text)
    if match is None:
        return None
    return text.count('\n', 0, match.start()) + 1


def _number(data, key, text, required=False, positive=False, integer=False, default=None):
    if key not in data or data[key] is None:
        if required:
            raise ScenarioError("required field is missing.", field=key)
        return default
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ScenarioError(f"expected a finite number, got {value!r}.", field=key, line=_line_of(text, key))
    if integer and int(value) != value:
        raise ScenarioError(f"expected an integer, got {value!r}.", field=key, line=_line_of(text, key))
    if positive and value <= 0:
        raise ScenarioError(f"must be positive, got {value!r}.", field=key, line=_line_of(text, key))
    return int(value) if integer else float(value)


def _vector(data, key, text, size, default=None):
    if key not in data:
        return default
    value = data[key]
    if (not isinstance(value, list) or len(value) != size
            or not all(isinstance(c, (int, float)) and not isinstance(c, bool) and math.isfinite(c)
                       for c in value)):
        raise ScenarioError(f"expected a list of {size} finite numbers, got {value!r}.",
                            field=key, line=_line_of(text, key))
    return [float(c) for c in value]


def parse_scenario(text: str) -> Scenario:
    """
    Validate a scenario document.

    Every problem is reported as a ScenarioError naming the field and, where
    it can be found, the line of the offending key.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON: {exc.msg} (column {exc.colno}).", line=exc.lineno)
    if not isinstance(data, dict):
        raise ScenarioError("top level must be a JSON object.", line=1)

    unknown = sorted(set(data) - KNOWN_FIELDS)
    if unknown:
        raise ScenarioError("unknown field.", field=unknown[0], line=_line_of(text, unknown[0]))

    alpha = data.get('alpha')
    if alpha is not None and alpha != 'search':
        alpha = _number(data, 'alpha', text, positive=True)

    rule = data.get('restart_rule')
    if rule is not None and (not isinstance(rule, str)
                             or not (rule == 'endpoint' or rule.startswith('fraction'))):
        raise ScenarioError(f"expected 'endpoint' or 'fraction:<beta>', got {rule!r}.",
                            field='restart_rule', line=_line_of(text, 'restart_rule'))

    l_t = _number(data, 'l_t', text, required=True, positive=True)
    l_r = _number(data, 'l_r', text, required=True)
    if l_r < 0:
        raise ScenarioError(f"must be non-negative, got {l_r!r}.", field='l_r', line=_line_of(text, 'l_r'))

    return Scenario(
        l_r=l_r,
        l_t=l_t,
        phi_max=_number(data, 'phi_max', text, positive=True),
        q0=_vector(data, 'q0', text, 4, default=[0.0, 0.0, 0.0, 0.0]),
        q1=_vector(data, 'q1', text, 4, default=[0.0, 0.0, 0.0, 0.0]),
        tol=_number(data, 'tol', text, positive=True),
        max_iter=_number(data, 'max_iter', text, positive=True, integer=True),
        alpha=alpha,
        seed=_number(data, 'seed', text, integer=True),
        steps=_number(data, 'steps', text, positive=True, integer=True),
        restart_rule=rule,
        radius=_number(data, 'radius', text, positive=True),
        target=_vector(data, 'target', text, 4),
        name=str(data.get('name', '')),
    )


def load_scenario(path: str) -> Scenario:
    try:
        with open(path, encoding='utf-8') as handle:
            text = handle.read()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file {path!r}: {exc.strerror}.")
    return parse_scenario(text)
