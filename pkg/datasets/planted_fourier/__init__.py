"""Planted Fourier dataset package"""
