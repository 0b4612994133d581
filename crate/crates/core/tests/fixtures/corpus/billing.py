"""Invoice helpers."""

from decimal import Decimal


def make_invoice(customer, items, currency, tax_rate, discount, due_days):
    total = sum((i.price * i.qty for i in items), Decimal(0))
    total = total * (1 - discount)
    return {"customer": customer, "total": total * (1 + tax_rate), "currency": currency, "due": due_days}


def fmt_total(value, currency):
    return f"{value:.2f} {currency}"
