"""Command-line front end and analyzer for holomorphic phase portraits"""
