"""Tests for lattice-kinetics"""
