"""JSON schemas for the instance and plan file formats."""
