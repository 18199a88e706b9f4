from user import User


class Hotel:
    """A hotel with a fixed number of rooms."""

    def __init__(self, name: str, rooms: int):
        self.name = name
        self.rooms = rooms
        self.guests = []
        self._reviews = []

    def book(self, type: str, number: int, guest: User) -> str:
        if len(self.guests) >= self.rooms:
            return "Full"
        self.guests.append(guest)
        return "Success!"

    def reviews(self):
        return list(self._reviews)

    def _reset(self):
        def clear(items):
            items.clear()
        clear(self.guests)
