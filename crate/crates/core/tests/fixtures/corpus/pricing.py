def price(item, member, coupon):
    return item.base_price * 0.8 if member and item.category in coupon.categories else item.base_price


def label(n):
    return "many" if n > 3 else "few"
