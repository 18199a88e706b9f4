from .user import User


class Review:
    def __init__(self, author: User, text: str, rating: int):
        self.author = author
        self.text = text
        self.rating = rating

    def is_positive(self) -> bool:
        return self.rating >= 4
