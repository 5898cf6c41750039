import re

from sympy import parse_expr, pi, sqrt, sin, cos, tan, asin, acos, atan, E

from . import ConfigError


class Parser:
    """a simple parser for numeric inputs

    It evaluates expressions as `4*pi/5` or `1/sqrt(2)`, with:
     - the constants `pi` and `E`
     - the functions `sqrt`, `sin`, `cos`, `tan`, `asin`, `acos`, `atan`
     - any extra named constants given to the constructor
    and rejects anything that does not reduce to a real number.
    """

    funcs = {
        "pi": pi,
        "E": E,
        "sqrt": sqrt,
        "sin": sin,
        "cos": cos,
        "tan": tan,
        "asin": asin,
        "acos": acos,
        "atan": atan,
    }
    allowed = re.compile(r"^[\w\s.+\-*/(),^]*$")

    def __init__(self, **consts):
        """create a parser, with optional extra constants

        >>> Parser(Theta0=0.59)("2*Theta0")
        1.18
        """
        self.loc = dict(self.funcs)
        for name, value in consts.items():
            if not name.isidentifier():
                raise ValueError(f"invalid constant name {name!r}")
            self.loc[name] = value

    def __call__(self, src: str | float | int) -> float:
        """evaluate `src` as a real number

        >>> p = Parser()
        >>> round(p("4*pi/5"), 12), abs(p("1/sqrt(2)") - 2 ** -0.5) < 1e-15, p(3)
        (2.513274122872, True, 3.0)
        >>> p("x + 1")
        Traceback (most recent call last):
          ...
        wedgespectra.ConfigError: In 'Parser' (src='x + 1')
        -> cannot parse (name 'x' is not defined)
        """
        if isinstance(src, (int, float)):
            return float(src)
        if not isinstance(src, str) or not self.allowed.match(src):
            raise ConfigError("invalid characters", "Parser", src=src)
        try:
            expr = parse_expr(src.replace("^", "**"), self.loc, ())
        except Exception as err:
            raise ConfigError(f"cannot parse ({err})", "Parser", src=src)
        if getattr(expr, "free_symbols", None):
            names = ", ".join(sorted(str(s) for s in expr.free_symbols))
            raise ConfigError(f"not a number (free symbols {names})", "Parser", src=src)
        try:
            value = complex(expr)
        except (TypeError, ValueError) as err:
            raise ConfigError(f"not a number ({err})", "Parser", src=src)
        if value.imag != 0:
            raise ConfigError("not a real number", "Parser", src=src)
        return value.real

    def vector(self, src: str | tuple | list) -> tuple[float, ...]:
        """evaluate a comma-separated list of expressions

        >>> Parser().vector("-3/5, 0, 4/5")
        (-0.6, 0.0, 0.8)
        """
        if isinstance(src, str):
            items = self._split(src)
        else:
            items = list(src)
        return tuple(self(item) for item in items)

    def _split(self, src):
        # split on top-level commas only, so `atan(1)` style calls survive
        items, depth, start = [], 0, 0
        for pos, char in enumerate(src):
            if char == "(":
                depth += 1
            elif char == ")":
                depth -= 1
            elif char == "," and depth == 0:
                items.append(src[start:pos])
                start = pos + 1
        items.append(src[start:])
        return [i.strip() for i in items]
