"""Multivariate Fourier projection over the unit hypercube"""
