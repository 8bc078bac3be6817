"""Tests for qei-lab."""
