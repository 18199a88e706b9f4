class Payment:
    def __init__(self, amount: float, currency: str = "USD"):
        self.amount = amount
        self.currency = currency

    def is_valid(self) -> bool:
        return self.amount > 0
