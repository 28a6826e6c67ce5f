"""CSV emission and parsing of simulation logs.

Format (schema v1, see docs/log-format.md): one comment line naming the
schema, one header row naming every column, then one row per step. Numbers
use 9 significant digits with '.' decimal separator and ',' delimiters, so
identical runs produce byte-identical files.
"""

from .engine import LOG_SCHEMA, SimulationLog, _STRING_COLUMNS


def format_value(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, bool) or isinstance(value, int):
        return str(int(value))
    return f"{value:.9g}"


def write_log_csv(log: SimulationLog, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(f"# evysc log schema {LOG_SCHEMA}\n")
        fh.write(",".join(log.columns) + "\n")
        for row in log.rows:
            fh.write(",".join(format_value(v) for v in row) + "\n")


def parse_log_csv(path) -> dict[str, list]:
    """Read a log CSV back into {column: values} with floats where numeric."""
    with open(path, "r", encoding="ascii") as fh:
        lines = [ln.rstrip("\n") for ln in fh if not ln.startswith("#")]
    if not lines:
        raise ValueError(f"empty log file {path}")
    columns = lines[0].split(",")
    data: dict[str, list] = {name: [] for name in columns}
    for line in lines[1:]:
        for name, cell in zip(columns, line.split(",")):
            data[name].append(cell if name in _STRING_COLUMNS else float(cell))
    return data
