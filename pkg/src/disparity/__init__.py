"""Disparity matrix H(w), rank diagnostics and stationary-point classification"""
