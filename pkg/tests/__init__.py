"""Tests for the holomorphic phase-portrait analyzer."""
