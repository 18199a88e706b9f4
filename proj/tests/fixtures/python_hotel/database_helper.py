import sqlite3

_DB = {}


def save_booking(name: str, room_number: int) -> None:
    _DB[name] = room_number


def delete_booking(name: str) -> bool:
    return _DB.pop(name, None) is not None


def find_booking(name: str) -> int:
    return _DB.get(name, -1)
