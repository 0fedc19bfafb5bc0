import gc
import logging
import os
from collections.abc import Mapping, Sequence

from openpyxl import Workbook

from utils.import_core import as_float

logger = logging.getLogger(__name__)

MAX_SHEET_TITLE = 31


def _sheet_title(name: str, used: set[str]) -> str:
    base = "".join("_" if ch in '[]:*?/\\' else ch for ch in name)[:MAX_SHEET_TITLE] or "Sheet"
    title = base
    counter = 1
    while title in used:
        suffix = f"_{counter}"
        title = base[: MAX_SHEET_TITLE - len(suffix)] + suffix
        counter += 1
    used.add(title)
    return title


def _cell_value(value: object) -> object:
    """Numbers go in as numbers so the workbook stays usable for plotting."""
    if isinstance(value, int | float):
        return value
    text = "" if value is None else str(value)
    number = as_float(text, None)
    return number if number is not None and text.strip() else text


def export_tables_to_xlsx(
    tables: Mapping[str, tuple[Sequence[str], Sequence[Mapping[str, object]]]],
    filepath: str,
) -> None:
    """One worksheet per named table of (headers, rows)."""
    wb = Workbook()
    default = wb.active
    if default is not None:
        wb.remove(default)
    used: set[str] = set()
    for name, (headers, rows) in tables.items():
        ws = wb.create_sheet(_sheet_title(name, used))
        ws.append(list(headers))
        for row in rows:
            ws.append([_cell_value(row.get(header, "")) for header in headers])

    os.makedirs(os.path.dirname(filepath), exist_ok=True) if os.path.dirname(filepath) else None
    wb.save(filepath)
    try:
        wb.close()
    except Exception:
        pass
    gc.collect()
    logger.debug("Wrote workbook sheets=%s path=%s", len(tables), filepath)
