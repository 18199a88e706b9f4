"""Regenerates the fixture task files; cursors are byte offsets found by anchor text."""
import json
import pathlib

FIXTURES = pathlib.Path(__file__).resolve().parents[2] / "tests" / "fixtures"


def offset(repo, path, anchor, after):
    """Byte offset just past `after` inside the first line containing `anchor`."""
    data = (FIXTURES / repo / path).read_bytes()
    line_start = data.index(anchor.encode())
    line_start = data.rindex(b"\n", 0, line_start) + 1
    return data.index(after.encode(), line_start) + len(after)


def task(repo, language, path, id, mode, expected, args, anchor, after, query=None, variants=None):
    record = {
        "id": id,
        "mode": mode,
        "repo_ref": f"../{repo}",
        "language": language,
        "context_file": path,
        "cursor": offset(repo, path, anchor, after),
    }
    if query:
        record["query"] = query
    record["expected_call"] = expected
    record["expected_args"] = args
    if variants:
        record["accepted_arg_variants"] = variants
    return record


PY = ("python_hotel", "python", "hotel_management_system.py")
JAVA = ("java_hotel", "java", "src/com/hotel/HotelManagementSystem.java")

python_tasks = [
    task(*PY, "py-token-01", "token", "text_processing.sentiment_analysis", ["review_text"],
         "sentiment = tp.", "sentiment = tp."),
    task(*PY, "py-token-02", "token", "text_processing.count_words", ["review.text"],
         "word_count = tp.", "word_count = tp."),
    task(*PY, "py-token-03", "token", "text_processing.translate", ["review_text", "language"],
         "translation = tp.", "translation = tp."),
    task(*PY, "py-token-04", "token", "payment_processor.refund_payment", ["transaction_id"],
         "refunded = pp.", "refunded = pp."),
    task(*PY, "py-conv-01", "conversational", "payment_processor.process_payment", ["name", "payment"],
         "pp.process_payment(name, payment)", "", query="how to process payment with PaymentProcessor?"),
    task(*PY, "py-conv-02", "conversational", "payment_processor.refund_payment", ["transaction_id"],
         "refunded = pp.", "", query="refund the payment with PaymentProcessor"),
]

# The identifier cue `sentiment` points at sentiment_analysis; the expected call is ranked second.
adversarial_tasks = [
    task(*PY, "py-adv-01", "token", "text_processing.find_entities", ["review_text"],
         "sentiment = tp.", "sentiment = tp."),
]

java_tasks = [
    task(*JAVA, "java-token-01", "token", "com.hotel.text.TextProcessing.sentimentAnalysis", ["reviewText"],
         "String sentiment = TextProcessing.", "TextProcessing."),
    task(*JAVA, "java-token-02", "token", "com.hotel.text.TextProcessing.countWords", ["reviewText"],
         "int wordCount = TextProcessing.", "TextProcessing."),
    task(*JAVA, "java-token-03", "token", "com.hotel.payment.PaymentProcessor.refundPayment", ["transactionId"],
         "boolean refunded = processor.", "processor."),
    task(*JAVA, "java-conv-01", "conversational", "com.hotel.payment.PaymentProcessor.processPayment",
         ["name", "payment"], "processor.processPayment(name, payment)", "",
         query="how to process payment with PaymentProcessor?"),
    task(*JAVA, "java-conv-02", "conversational", "com.hotel.payment.PaymentProcessor.refundPayment",
         ["transactionId"], "boolean refunded = processor.", "", query="refund the payment with PaymentProcessor"),
]


def write(name, records):
    text = "".join(json.dumps(r) + "\n" for r in records)
    (FIXTURES / "tasks" / name).write_text(text)


write("python_hotel.jsonl", python_tasks)
write("python_adversarial.jsonl", adversarial_tasks)
write("java_hotel.jsonl", java_tasks)
