"""
Text Input Helpers
Encoding-aware reading of GTS files, listings, traces and configs
"""

import logging
from pathlib import Path
from typing import Union

try:
    import chardet
    CHARDET_AVAILABLE = True
except ImportError:
    CHARDET_AVAILABLE = False

logger = logging.getLogger(__name__)

FALLBACK_ENCODINGS = ['utf-8', 'utf-8-sig', 'iso-8859-1', 'cp1252']


def detect_encoding(file_path: Path) -> str:
    """Detect file encoding with chardet if available"""
    if not CHARDET_AVAILABLE:
        return 'utf-8'

    try:
        detector = chardet.UniversalDetector()
        with open(file_path, 'rb') as f:
            for chunk in iter(lambda: f.read(8192), b''):
                detector.feed(chunk)
                if detector.done:
                    break

        result = detector.close()
        confidence = result.get('confidence', 0) if result else 0
        encoding = result.get('encoding') if result else None
        return encoding if encoding and confidence > 0.7 else 'utf-8'
    except Exception:
        return 'utf-8'


def read_text_file(file_path: Union[str, Path]) -> str:
    """Read a text file trying the detected encoding first, then common fallbacks"""
    path = Path(file_path)
    detected = detect_encoding(path)
    encodings = [detected] + [e for e in FALLBACK_ENCODINGS if e != detected]

    last_error = None
    for encoding in encodings:
        try:
            return path.read_text(encoding=encoding)
        except (UnicodeDecodeError, LookupError) as e:
            last_error = e
            logger.debug(f"Decoding {path.name} as {encoding} failed: {e}")

    raise UnicodeDecodeError('utf-8', b'', 0, 1, f"cannot decode {path}: {last_error}")


def safe_int(value, default: int = 0) -> int:
    """Safely convert value to int"""
    try:
        if isinstance(value, str):
            value = value.strip()
            return int(value, 0)
        return int(value) if value is not None else default
    except (ValueError, TypeError):
        return default


def safe_float(value, default: float = 0.0) -> float:
    """Safely convert value to float"""
    try:
        return float(value) if value is not None and value != '' else default
    except (ValueError, TypeError):
        return default
