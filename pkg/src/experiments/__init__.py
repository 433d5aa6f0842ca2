"""Experiment orchestration package"""
