import logging
import os
import sys


def parse_ls_colors(ls_colors: str | None = None) -> dict[str, str]:
    """
    Parse an LS_COLORS string into a key -> color code mapping.

    Args:
        ls_colors: LS_COLORS value (read from the environment when None)

    Returns:
        dict[str, str]: color codes keyed by LS_COLORS key, defaults filled in
    """
    if ls_colors is None:
        ls_colors = os.environ.get("LS_COLORS", "")

    colors = {}
    for item in ls_colors.split(":"):
        if "=" in item:
            key, value = item.split("=", 1)
            colors[key] = value

    for key, value in get_default_colors().items():
        colors.setdefault(key, value)

    return colors


def get_default_colors() -> dict[str, str]:
    """Fallback colors for the keys the formatter uses."""
    return {
        "fi": "",  # plain text (INFO)
        "so": "01;35",  # magenta (WARNING)
        "or": "40;31;01",  # red (ERROR)
        "mi": "40;31;01",  # red (CRITICAL)
        "*~": "00;90",  # dim grey (DEBUG / detail lines)
    }


def color_code_to_ansi(color_code: str) -> str:
    """Turn an LS_COLORS code such as '01;34' into an ANSI escape sequence."""
    if not color_code:
        return ""
    return f"\033[{color_code}m"


class LSColorFormatter(logging.Formatter):
    """Level-colored formatter driven by LS_COLORS"""

    # progress / milestone markers used in tubemorph log messages
    stage_markers = ("🟢", "✅", "⚠️", "❌")

    def __init__(self, fmt=None):
        super().__init__(fmt)
        self.colors = parse_ls_colors()
        self.level_mapping = {
            logging.DEBUG: "*~",
            logging.INFO: "fi",
            logging.WARNING: "so",
            logging.ERROR: "or",
            logging.CRITICAL: "mi",
        }

    def format(self, record):
        if record.name.startswith("tubemorph"):
            msg = super().format(record)
        elif record.levelno >= logging.WARNING:
            # 外部ライブラリは "WARNING(scipy): ..." 形式
            msg = f"{record.levelname}({record.name}): {record.getMessage()}"
        else:
            msg = record.getMessage()

        color_key = self.level_mapping.get(record.levelno, "fi")
        # INFO lines without a marker are details; dim them
        if record.levelno == logging.INFO and not any(m in msg for m in self.stage_markers):
            color_key = "*~"

        ansi = color_code_to_ansi(self.colors.get(color_key, ""))
        if not ansi or not handler.stream.isatty():
            return msg
        return f"{ansi}{msg}\033[0m"


def set_batch_mode(batch: bool = False) -> None:
    """Switch between timestamped batch logs and colored interactive logs."""
    if batch:
        handler.setFormatter(batch_formatter)
    else:
        handler.setFormatter(LSColorFormatter("%(message)s"))
    configure_external_loggers(batch_mode=batch)


def set_verbose(verbose: bool = False) -> None:
    level = logging.DEBUG if verbose else logging.INFO
    handler.setLevel(level)
    logger.setLevel(level)


def configure_external_loggers(batch_mode: bool = False) -> None:
    """
    Set the level of third-party loggers.

    Args:
        batch_mode: True lets INFO through, False keeps WARNING and above
    """
    external_loggers = [
        "PIL",
        "matplotlib",
        "numba",
        "skimage",
        "sklearn",
        "concurrent.futures",
    ]

    log_level = logging.INFO if batch_mode else logging.WARNING
    for logger_name in external_loggers:
        logging.getLogger(logger_name).setLevel(log_level)


handler = logging.StreamHandler(sys.stderr)
handler.setLevel(logging.INFO)

batch_formatter = logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s")
handler.setFormatter(LSColorFormatter("%(message)s"))

root_logger = logging.getLogger()
root_logger.setLevel(logging.INFO)
for h in root_logger.handlers[:]:
    root_logger.removeHandler(h)
root_logger.addHandler(handler)

logger = logging.getLogger("tubemorph")
logger.setLevel(logging.INFO)
logger.propagate = True

configure_external_loggers(batch_mode=False)
