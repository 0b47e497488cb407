"""Test suite for matscale package."""
