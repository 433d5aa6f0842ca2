"""Literal-space SGD with rank and degeneracy monitoring"""
