"""Convex learning in the truncated canonical space"""
