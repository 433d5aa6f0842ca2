"""Random labels dataset package"""
