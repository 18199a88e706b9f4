package com.hotel.payment;

public class PaymentProcessor {
    // Charges the guest for a booking.
    public boolean processPayment(String name, Payment payment) {
        return payment.getAmount() > 0;
    }

    public boolean refundPayment(String transactionId) {
        return !transactionId.isEmpty();
    }
}
