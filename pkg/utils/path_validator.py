"""
Path Validator
Checks workbench inputs and outputs before a pipeline stage touches them
"""

import logging
import re
from pathlib import Path
from typing import Iterable, Optional, Union

from utils.errors import PlumberError

PathLike = Union[str, Path]

_UNSAFE_CHARS = re.compile(r'[<>:"/\\|?*\s]+')


class PathValidationError(PlumberError):
    """A required input or output path is unusable"""
    pass


class PathValidator:
    """Input files of each pipeline stage and writable outputs"""

    ARCHIVE_EXTENSIONS = ('.jsonl',)
    TEMPLATE_EXTENSIONS = ('.json',)
    LISTING_EXTENSIONS = ('.lst', '.s', '.asm', '.txt')

    @staticmethod
    def require_file(path_str: Optional[PathLike], what: str,
                     extensions: Optional[Iterable[str]] = None) -> Path:
        """Existing regular file; an unexpected extension only warns"""
        if not path_str:
            raise PathValidationError(f"no {what} given")
        path = Path(path_str).expanduser().resolve()
        if not path.is_file():
            raise PathValidationError(f"{what} not found: {path}")
        if extensions and path.suffix.lower() not in extensions:
            logging.getLogger(__name__).warning(f"{what} {path.name}: unusual extension, expected one of "
                                                f"{', '.join(extensions)}")
        return path

    @staticmethod
    def output_file(path_str: PathLike) -> Path:
        """Output file whose parent directory exists afterwards"""
        path = Path(path_str).expanduser().resolve()
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise PathValidationError(f"cannot create output directory for {path}: {e}") from e
        if path.exists() and not path.is_file():
            raise PathValidationError(f"output path is not a file: {path}")
        return path

    @staticmethod
    def sanitize_label(label: str) -> str:
        """Behaviour label as a file-name fragment"""
        cleaned = _UNSAFE_CHARS.sub('_', str(label)).strip(' ._')
        return cleaned or "unlabelled"
