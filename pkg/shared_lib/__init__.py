"""Configuration schema and parsing helpers shared by the harness."""
