# hotel_management_system.py
from datetime import datetime, timedelta
import database_helper as dbh
import text_processing as tp
import payment_processor as pp
from hotel import Hotel
from user import User
from review import Review


class HotelReviewAndBookingSystem:
    def __init__(self, hotel_name, rooms):
        self.hotel = Hotel(hotel_name, rooms)
        self.reviews = []

    def analyze_sentiments(self):
        sentiments = []
        for review in self.reviews:
            review_text = review.text
            sentiment = tp.sentiment_analysis(review_text)
            sentiments.append(sentiment)
        return sentiments

    def review_lengths(self):
        lengths = []
        for review in self.reviews:
            word_count = tp.count_words(review.text)
            lengths.append(word_count)
        return lengths

    def translate_review(self, review: Review, language: str) -> str:
        review_text = review.text
        translation = tp.translate(review_text, language)
        return translation

    def bookroom(self, type, number, name, payment):
        guest = User(name)
        result = self.hotel.book(type, number, guest)
        if result == "Success!":
            # how to process payment with PaymentProcessor?
            pp.process_payment(name, payment)
            dbh.save_booking(name, number)
        return result

    def cancel_booking(self, name, transaction_id):
        refunded = pp.refund_payment(transaction_id)
        if refunded:
            dbh.delete_booking(name)
        return refunded
