function replaceItems(token, payload) {
  $.ajax({
    url: "https://api.example.com/v1/items?access_token=" + token,
    type: "PUT",
    data: payload
  });
}
