"""Tests for grassmann-edmd."""
