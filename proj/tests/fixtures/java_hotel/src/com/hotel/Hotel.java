package com.hotel;

import java.util.ArrayList;
import java.util.List;

public class Hotel {
    private final String name;
    private final List<String> guests = new ArrayList<>();

    public Hotel(String name) {
        this.name = name;
    }

    public String book(String type, int number, String guest) {
        guests.add(guest);
        return "Success!";
    }

    int occupancy() {
        return guests.size();
    }
}
