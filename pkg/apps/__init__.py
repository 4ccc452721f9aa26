"""rtmodel Django apps package marker."""
