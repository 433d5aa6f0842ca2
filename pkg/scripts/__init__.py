"""canonlab command-line scripts"""
