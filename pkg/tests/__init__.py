"""Tests for the scene-interaction harness."""
