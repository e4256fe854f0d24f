import hashlib
from typing import Iterable

_CHUNK = 1 << 16


def sha256_file(path: str) -> str:
    """
    Hex SHA-256 digest of a file's bytes.

    :param path: File to hash.
    :return: Hexadecimal digest.
    """
    hasher = hashlib.sha256()
    with open(path, 'rb') as f:
        for chunk in iter(lambda: f.read(_CHUNK), b''):
            hasher.update(chunk)
    return hasher.hexdigest()


def sha256_text(parts: Iterable[str]) -> str:
    """
    Hex SHA-256 digest of several strings, each length-prefixed so that
    ("ab", "c") and ("a", "bc") hash differently.
    """
    hasher = hashlib.sha256()
    for part in parts:
        data = part.encode('utf-8')
        hasher.update(len(data).to_bytes(8, 'big'))
        hasher.update(data)
    return hasher.hexdigest()
