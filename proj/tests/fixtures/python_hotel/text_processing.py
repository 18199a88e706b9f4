# text_processing.py
from typing import List, Dict
import datetime


def tokenize(text: str) -> List[str]:
    return text.split()


def count_words(text: str) -> int:
    return len(tokenize(text))


def find_entities(text: str) -> List[str]:
    return [w for w in tokenize(text) if w[:1].isupper()]


def get_word_frequency(text: str, word: str = None) -> Dict[str, int]:
    words = tokenize(text)
    return {w: words.count(w) for w in set(words) if word is None or w == word}


def stem(text: str) -> str:
    return text.rstrip("s")


def sentiment_analysis(text: str) -> str:
    """Classify the text as positive, negative or neutral."""
    return "neutral"


def lemmatize(text: str) -> str:
    return stem(text)


def spell_check(text: str) -> str:
    return text


def translate(text: str, target_language: str) -> str:
    """Translate text into the target language.

    :param target_language: ISO language code
    """
    return text


def get_synonyms(word: str) -> List[str]:
    return [word]


def remove_stopwords(text: str) -> str:
    return " ".join(w for w in tokenize(text) if len(w) > 3)


def summarize(text: str, max_sentences: int = 3) -> str:
    return ". ".join(text.split(". ")[:max_sentences])
