package com.hotel.text;

import java.util.Arrays;
import java.util.List;

public class TextProcessing {
    public static List<String> tokenize(String text) {
        return Arrays.asList(text.split("\\s+"));
    }

    public static int countWords(String text) {
        return tokenize(text).size();
    }

    /** Classifies the text as positive, negative or neutral. */
    public static String sentimentAnalysis(String text) {
        return "neutral";
    }

    /**
     * Translates text into the target language.
     *
     * @param targetLanguage ISO language code
     */
    public static String translate(String text, String targetLanguage) {
        return text;
    }

    public static String translate(String text) {
        return translate(text, "en");
    }

    public static List<String> getSynonyms(String word) {
        return List.of(word);
    }

    private static String normalize(String text) {
        return text.trim();
    }
}
