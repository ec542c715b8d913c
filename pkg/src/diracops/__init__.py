"""
diracops - ディラック電子の演算子代数ツールキット

射影演算子とNWFW演算子を構成・相互検証し、ディラック・ベッセルビーム上で
スピン軌道相互作用の観測量を再現するCLIツール。
"""

__version__ = "0.1.0"
