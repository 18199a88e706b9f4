package com.hotel;

import com.hotel.payment.Payment;
import com.hotel.payment.PaymentProcessor;
import com.hotel.text.TextProcessing;
import java.util.*;

public class HotelManagementSystem {
    private final Hotel hotel = new Hotel("Grand");
    private final List<String> reviews = new ArrayList<>();

    public List<String> analyzeSentiments() {
        List<String> sentiments = new ArrayList<>();
        for (String reviewText : reviews) {
            String sentiment = TextProcessing.sentimentAnalysis(reviewText);
            sentiments.add(sentiment);
        }
        return sentiments;
    }

    public int reviewLength(String reviewText) {
        int wordCount = TextProcessing.countWords(reviewText);
        return wordCount;
    }

    public String bookRoom(String type, int number, String name, Payment payment) {
        PaymentProcessor processor = new PaymentProcessor();
        String result = hotel.book(type, number, name);
        if (result.equals("Success!")) {
            // how to process payment with PaymentProcessor?
            processor.processPayment(name, payment);
        }
        return result;
    }

    public boolean cancel(PaymentProcessor processor, String transactionId) {
        boolean refunded = processor.refundPayment(transactionId);
        return refunded;
    }

    interface Notifier {
        void notifyGuest(String name, String... lines);
    }
}
