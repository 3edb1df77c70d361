"""Tests for slicedmk."""
