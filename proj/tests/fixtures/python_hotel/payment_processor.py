# payment_processor.py
from payment import Payment


def process_payment(name: str, payment: Payment) -> bool:
    """Charge the guest for a booking."""
    return payment.amount > 0


def refund_payment(transaction_id: str) -> bool:
    return bool(transaction_id)
