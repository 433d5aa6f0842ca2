"""canonlab - Synthetic Dataset Generators Package"""
